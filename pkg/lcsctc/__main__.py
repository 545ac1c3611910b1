# -*- coding: utf-8 -*-

# Copyright (c) 2025, lcsctc developers. The MIT License (MIT).

import sys

from .cli import main as cli_main


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
