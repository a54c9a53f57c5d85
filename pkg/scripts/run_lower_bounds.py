#!/usr/bin/env python3
"""Universal lower-bound floors on concrete operators.

Writes lower-bounds.csv: sup-norm residuals of the right shift on bounded
sequences under random two-point stepsizes (floor 1/(n+1)), l1 residuals of
the averaged shift on summable sequences under random averaging stepsizes
(floor 1/sqrt(n+1)), and the closed-form binomial infimum inf f_n.
"""

import argparse
import sys

from mannrates import cli


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")
    a = p.parse_args()
    return cli.main(["reproduce", "--target", "lower-bounds", "--N", str(a.N),
                     "--seed", str(a.seed), "--out", a.out])


if __name__ == "__main__":
    sys.exit(main())
