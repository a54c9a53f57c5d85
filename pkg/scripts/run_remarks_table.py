#!/usr/bin/env python3
"""Harmonic stepsizes beta_n = n/(n+2) versus the optimal recursion.

Writes remarks-table.csv: the harmonic-stepsize residuals, their closed form
4/(n+1) * (1 - H_{n+2}/(n+2)), the optimal residuals, and the ratio between
the two series (which peaks near 1.0522 at n = 4).
"""

import argparse
import sys

from mannrates import cli


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=50)
    p.add_argument("--out", default="results")
    a = p.parse_args()
    return cli.main(["reproduce", "--target", "remarks-table",
                     "--N", str(a.N), "--out", a.out])


if __name__ == "__main__":
    sys.exit(main())
