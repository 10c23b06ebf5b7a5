"""Entry point for running the command line with python -m poisson_bv."""

import sys

from poisson_bv.cli import main

if __name__ == "__main__":
    sys.exit(main())
