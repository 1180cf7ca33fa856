#!/usr/bin/env python3
"""Error growth along frequency-tied mesh rules.

Defaults: omega in {10, 20, 40} under the rules wh=1, wh=0.5 (error
grows with omega) and w3h2=1 (error stays level; n reaches 253 at
omega = 40, the heaviest solve in the default set).

    python3 scripts/pollution_study.py --rule wh=0.5 --omega 10 20 40
"""

import sys

from elastodg.cli import main

if __name__ == "__main__":
    sys.exit(main(["pollution", *sys.argv[1:]]))
