#!/usr/bin/env python3
"""
CMX - Main Entry Point
"""

import sys

from bench.cli import cli_main


def main():
    """Main entry point."""
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
