#!/usr/bin/env python3
"""
TIQCA simulator quick launcher.

Usage:
    python run_tiqca.py <command> [options]

Run ``python run_tiqca.py --help`` for full options.
"""

import sys

from tiqca.app import main

if __name__ == "__main__":
    sys.exit(main())
