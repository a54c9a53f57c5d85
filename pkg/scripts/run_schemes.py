#!/usr/bin/env python3
"""Best achievable residual series for the classical scheme families.

Writes fig4.csv: stagewise-optimized stepsizes for halpern, km, the inertial
and extrapolated variants, km-halpern, and ishikawa, one residual column per
family.
"""

import argparse
import sys

from mannrates import cli


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")
    a = p.parse_args()
    return cli.main(["reproduce", "--target", "fig4", "--N", str(a.N),
                     "--seed", str(a.seed), "--out", a.out])


if __name__ == "__main__":
    sys.exit(main())
