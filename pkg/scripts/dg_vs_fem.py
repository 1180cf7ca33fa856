#!/usr/bin/env python3
"""High-frequency comparison of the DG scheme against the conforming
baseline along the diagonal cross-section y = x.

Defaults: omega = 100 on n in {50, 120, 200}, both methods.  Writes the
error table to the --out CSV and the sampled |Re u| curves to
<out stem>_xsec.csv; --svg adds a line plot of the curves.

    python3 scripts/dg_vs_fem.py --n 50 120 --svg
"""

import sys

from elastodg.cli import main

if __name__ == "__main__":
    sys.exit(main(["compare", *sys.argv[1:]]))
