# ---------------------------------------------------------------------
# ohcsvm/quantum_simulator.py
# ---------------------------------------------------------------------
# Dense statevector simulator for the gate set used by the embeddings.
#
# Qubit q is axis q of the amplitude tensor reshaped to [2] * n, i.e.
# qubit 0 is the most significant bit of the basis index.
# ---------------------------------------------------------------------

import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ohcsvm.constants_config import FLOAT_FORMAT, MAX_QUBITS, NORM_TOL
from ohcsvm.errors import CapacityError, ShapeError

logger = logging.getLogger(__name__)


class GateKind(str, Enum):
    H = "H"
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    CNOT = "CNOT"
    CZ = "CZ"
    RZZ = "RZZ"


ROTATIONS = {GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.RZZ}
TWO_QUBIT = {GateKind.CNOT, GateKind.CZ, GateKind.RZZ}

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    targets: Tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", GateKind(self.kind))
        targets = tuple(int(q) for q in self.targets)
        arity = 2 if self.kind in TWO_QUBIT else 1
        if len(targets) != arity:
            raise ShapeError(f"{self.kind.value} takes {arity} target(s), got {targets}")
        if len(set(targets)) != len(targets):
            raise ShapeError(f"{self.kind.value} targets must be distinct, got {targets}")
        if min(targets) < 0:
            raise ShapeError(f"negative qubit index in {targets}")
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "angle", float(self.angle))

    def adjoint(self) -> "Gate":
        if self.kind in ROTATIONS:
            return Gate(self.kind, self.targets, -self.angle)
        return self


@dataclass(frozen=True)
class Statevector:
    n_qubits: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.size != 2 ** self.n_qubits:
            raise ShapeError(
                f"{self.n_qubits} qubit(s) need {2 ** self.n_qubits} amplitudes, got {amps.size}"
            )
        object.__setattr__(self, "amps", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


def _check_width(n: int) -> None:
    if not (1 <= n <= MAX_QUBITS):
        raise CapacityError(f"register width must lie in 1..{MAX_QUBITS}, got {n}")


def init_state(n: int) -> Statevector:
    """|0...0> on n qubits."""
    _check_width(n)
    amps = np.zeros(2 ** n, dtype=complex)
    amps[0] = 1.0
    return Statevector(n, amps)


def uniform_superposition(n: int) -> Statevector:
    _check_width(n)
    return Statevector(n, np.full(2 ** n, 1.0 / math.sqrt(2 ** n), dtype=complex))


def _single_qubit_matrix(gate: Gate) -> np.ndarray:
    if gate.kind is GateKind.H:
        return _HADAMARD
    c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
    if gate.kind is GateKind.RX:
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if gate.kind is GateKind.RY:
        return np.array([[c, -s], [s, c]], dtype=complex)
    phase = np.exp(-0.5j * gate.angle)
    return np.array([[phase, 0], [0, np.conj(phase)]], dtype=complex)


def _pair_index(n: int, a: int, b: int, va: int, vb: int) -> tuple:
    index = [slice(None)] * n
    index[a] = va
    index[b] = vb
    return tuple(index)


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Return a new state; the input is left untouched."""
    n = state.n_qubits
    if max(gate.targets) >= n:
        raise ShapeError(f"gate {gate.kind.value}{gate.targets} exceeds {n} qubit(s)")

    psi = state.amps.reshape((2,) * n)

    if gate.kind not in TWO_QUBIT:
        q = gate.targets[0]
        out = np.tensordot(_single_qubit_matrix(gate), psi, axes=([1], [q]))
        return Statevector(n, np.moveaxis(out, 0, q))

    a, b = gate.targets
    out = psi.copy()
    if gate.kind is GateKind.CNOT:
        out[_pair_index(n, a, b, 1, 0)] = psi[_pair_index(n, a, b, 1, 1)]
        out[_pair_index(n, a, b, 1, 1)] = psi[_pair_index(n, a, b, 1, 0)]
    elif gate.kind is GateKind.CZ:
        out[_pair_index(n, a, b, 1, 1)] *= -1
    else:
        even = np.exp(-0.5j * gate.angle)
        odd = np.conj(even)
        out[_pair_index(n, a, b, 0, 0)] *= even
        out[_pair_index(n, a, b, 1, 1)] *= even
        out[_pair_index(n, a, b, 0, 1)] *= odd
        out[_pair_index(n, a, b, 1, 0)] *= odd
    return Statevector(n, out)


def run_circuit(gates: Iterable[Gate], state: Statevector) -> Statevector:
    for gate in gates:
        state = apply_gate(state, gate)
    return state


def adjoint_circuit(gates: Sequence[Gate]) -> List[Gate]:
    """U^dagger: reversed order, rotation angles negated."""
    return [gate.adjoint() for gate in reversed(gates)]


def inner_product(a: Statevector, b: Statevector) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.n_qubits != b.n_qubits:
        raise ShapeError(f"register widths differ: {a.n_qubits} vs {b.n_qubits}")
    return complex(np.vdot(a.amps, b.amps))


def prob_all_zeros(state: Statevector) -> float:
    return float(abs(state.amps[0]) ** 2)


def is_normalized(state: Statevector, tol: float = NORM_TOL) -> bool:
    return abs(state.norm() - 1.0) <= tol


def ghz_circuit(n: int) -> List[Gate]:
    _check_width(n)
    gates = [Gate(GateKind.H, (0,))]
    gates += [Gate(GateKind.CNOT, (q, q + 1)) for q in range(n - 1)]
    return gates


def dump_amplitudes(state: Statevector, file: Union[str, Path]) -> Path:
    """Basis index with the real and imaginary amplitude parts."""
    file = Path(file)
    file.parent.mkdir(parents=True, exist_ok=True)
    n = state.n_qubits
    frame = pd.DataFrame({
        "index": np.arange(2 ** n),
        "re": state.amps.real,
        "im": state.amps.imag,
    })
    frame.to_csv(file, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("wrote %d amplitude(s) to %s", 2 ** n, file)
    return file
