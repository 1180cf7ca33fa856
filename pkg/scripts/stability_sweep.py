#!/usr/bin/env python3
"""Frequency sweep of the discrete solution norms on fixed meshes.

Defaults run omega = 1..200 at h = 0.05 and h = 0.01 for both the DG
scheme and the conforming baseline; that is roughly 800 solves and more
than an hour of compute.  Pass --omega / --h / --method to trim, e.g.

    python3 scripts/stability_sweep.py --omega 1:50 --h 0.05 --svg
"""

import sys

from elastodg.cli import main

if __name__ == "__main__":
    sys.exit(main(["stability", *sys.argv[1:]]))
