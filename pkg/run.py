#!/usr/bin/env python3
"""
Path Feasibility Query Toolkit - Runner

Runs the `pfq` command line from a source checkout:
- IR parsing, SSA construction and change value analysis
- Path conditions, STP / SMT-LIB2 queries and prefix series
- Brute-force oracle and external solver benchmarks
- Configuration display and sample .env creation
"""

import sys
from pathlib import Path

# Add the checkout root to the Python path
sys.path.insert(0, str(Path(__file__).parent))

from src.cli import main


if __name__ == "__main__":
    sys.exit(main())
