#!/usr/bin/env python3
"""Weight profiles of the monotone stagewise-optimal rows.

Writes fig5.csv: the coefficients pi^n_i of the optimized rows at a few
checkpoints, showing the mass concentrating on the anchor and the most
recent iterates.
"""

import argparse
import sys

from mannrates import cli


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")
    a = p.parse_args()
    return cli.main(["reproduce", "--target", "fig5", "--N", str(a.N),
                     "--seed", str(a.seed), "--out", a.out])


if __name__ == "__main__":
    sys.exit(main())
