"""Run the acceptance suite and print one PASS/FAIL line per criterion.

Usage: python3 scripts/run_acceptance.py [-k EXPR]
"""

import pathlib
import sys

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    sys.exit(pytest.main([str(ROOT / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider", *sys.argv[1:]]))
