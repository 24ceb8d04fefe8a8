# ---------------------------------------------------------------------
# cli/utils.py
# ---------------------------------------------------------------------
# Shared helpers for the numbered cli scripts: import path for the
# ohcsvm package and console banners.
# ---------------------------------------------------------------------

import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent

# Scripts run as `python3 cli/NN_name.py`, so the package root is not on sys.path
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

from ohcsvm.constants_config import CYAN, RESET, YELLOW  # noqa: E402

WIDTH = 82


def banner(title: str) -> None:
    print(f"\n{YELLOW}{'=' * WIDTH}")
    print(f"{CYAN}{title:>{(WIDTH + len(title)) // 2}}{RESET}")
    print(f"{YELLOW}{'=' * WIDTH}{RESET}")


def row(label: str, value: object) -> None:
    """One right-aligned `label: value` line."""
    print(f"{label + ':':>20} {value}")


def rule() -> None:
    print("-" * WIDTH)


def footer() -> None:
    print("=" * WIDTH)
    print(RESET)
