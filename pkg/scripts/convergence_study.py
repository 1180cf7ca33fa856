#!/usr/bin/env python3
"""Mesh-refinement study with fitted error slopes.

Defaults: omega in {5, 10, 20, 30}, n in {8, 16, 32, 64}, DG only.
The fitted least-squares slopes print after the CSV is written.

    python3 scripts/convergence_study.py --omega 5 --svg
"""

import sys

from elastodg.cli import main

if __name__ == "__main__":
    sys.exit(main(["convergence", *sys.argv[1:]]))
