"""CLI: python -m molgen --out data [--molecule h2o ...]"""

import argparse
import sys

from .geometry import MOLECULES
from .generate import generate_corpus


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="molgen",
        description="Generate STO-3G RHF FCIDUMP grids for the scan corpus.",
    )
    parser.add_argument("--out", required=True, help="output root directory")
    parser.add_argument(
        "--molecule",
        action="append",
        choices=sorted(MOLECULES),
        help="restrict to one or more molecules (default: all)",
    )
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)
    generate_corpus(args.out, molecules=args.molecule, verbose=not args.quiet)
    return 0


if __name__ == "__main__":
    sys.exit(main())
