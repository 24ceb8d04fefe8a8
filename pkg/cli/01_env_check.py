# -----------------------------------------------------------
# cli/01_env_check.py
# -----------------------------------------------------------
# Confirm the Python runtime, library stack and simulator
# before running the pipeline
# -----------------------------------------------------------

"""
python3 cli/01_env_check.py

# Larger GHZ probe of the statevector simulator
python3 cli/01_env_check.py --qubits 12
"""

import argparse
import math
import os
import platform
import sys
from importlib import metadata

import numpy as np
import psutil

from utils import banner, footer, row, rule
from ohcsvm import __version__
from ohcsvm.constants_config import GREEN, MAX_QUBITS, RED, RESET
from ohcsvm.errors import CapacityError
from ohcsvm.quantum_simulator import init_state, run_circuit, ghz_circuit
from ohcsvm.settings import get_settings

PACKAGES = ("numpy", "pandas", "pydantic", "pydantic-settings", "fastapi", "psutil")


def parse_args() -> argparse.Namespace:
    """
    Parses command-line arguments for the runtime sanity check.

    Returns:
        argparse.Namespace: An object containing the parsed arguments,
            specifically the width of the GHZ probe circuit.
    """
    parser = argparse.ArgumentParser(
        description="Validate the Python runtime, dependencies and statevector simulator."
    )
    parser.add_argument(
        "--qubits",
        type=int,
        default=4,
        help=f"Width of the GHZ probe circuit, 1..{MAX_QUBITS} (default: 4).",
    )
    return parser.parse_args()


def package_version(name: str) -> str:
    try:
        return metadata.version(name)
    except metadata.PackageNotFoundError:
        return f"{RED}not installed{RESET}"


def ghz_probe(n: int) -> float:
    """
    Prepares the n-qubit GHZ state and returns the largest deviation of
    its amplitudes from (|0...0> + |1...1>)/sqrt(2).
    """
    state = run_circuit(ghz_circuit(n), init_state(n))
    expected = np.zeros(2 ** n)
    expected[0] = expected[-1] = 1 / math.sqrt(2)
    return float(np.max(np.abs(state.amps - expected)))


def main() -> int:
    args = parse_args()
    settings = get_settings()

    banner("ohc-qsvm runtime sanity check")
    row("Current PWD", os.getcwd())
    row("Python executable", sys.executable)
    row("Python version", platform.python_version())
    row("ohcsvm version", __version__)
    rule()
    for name in PACKAGES:
        row(name, package_version(name))
    rule()
    memory = psutil.virtual_memory()
    row("CPU count", psutil.cpu_count(logical=True))
    row("Memory total", f"{memory.total // (2**30)} GB")
    row("Memory used", f"{memory.percent}%")
    row("Workers setting", settings.workers)
    row("Output root", settings.output_root)
    rule()

    try:
        deviation = ghz_probe(args.qubits)
    except CapacityError as exc:
        print(f"\n{RED}[!] Simulator error: {exc}{RESET}")
        return 1

    row("GHZ probe", f"{args.qubits} qubit(s), max deviation {deviation:.2e}")
    if deviation > 1e-12:
        print(f"{RED}{'Status:':>20} simulator disagrees with the GHZ reference.{RESET}")
        return 1

    print(f"{GREEN}{'Status:':>20} runtime looks good for pipeline runs.{RESET}")
    footer()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
