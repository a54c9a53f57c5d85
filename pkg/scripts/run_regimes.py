#!/usr/bin/env python3
"""Inverse-residual growth of the three optimizer regimes.

Writes fig3.csv: the monotone stagewise (ms), free stagewise (s), and joint
fixed-horizon (fh, small n only) optimal residuals with their reciprocals,
plus a fitted slope of 1/R_n in the sidecar when the horizon is long enough.
"""

import argparse
import sys

from mannrates import cli


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")
    a = p.parse_args()
    return cli.main(["reproduce", "--target", "fig3", "--N", str(a.N),
                     "--seed", str(a.seed), "--out", a.out])


if __name__ == "__main__":
    sys.exit(main())
