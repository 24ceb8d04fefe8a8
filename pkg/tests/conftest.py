# ---------------------------------------------------------------------
# tests/conftest.py
# ---------------------------------------------------------------------
# Shared fixtures and independent oracles:
#   dense_unitary     full 2^n x 2^n matrix of a gate list (Kronecker products)
#   qp_oracle         projected-gradient solver of the SVM dual
# ---------------------------------------------------------------------

import math
from functools import reduce
from typing import Sequence, Tuple

import numpy as np
import pytest

from ohcsvm.data_pipeline import FeatureScaler, PlateGeometry, split_dataset
from ohcsvm.quantum_simulator import Gate, GateKind
from ohcsvm.synthetic import synth_oracle_dataset

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_P0 = np.diag([1, 0]).astype(complex)
_P1 = np.diag([0, 1]).astype(complex)


def _one_qubit(gate: Gate) -> np.ndarray:
    c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
    if gate.kind is GateKind.H:
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if gate.kind is GateKind.RX:
        return np.array([[c, -1j * s], [-1j * s, c]])
    if gate.kind is GateKind.RY:
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.diag([np.exp(-0.5j * gate.angle), np.exp(0.5j * gate.angle)])


def _kron(ops: Sequence[np.ndarray]) -> np.ndarray:
    # qubit 0 is the leftmost factor
    return reduce(np.kron, ops)


def gate_matrix(gate: Gate, n: int) -> np.ndarray:
    if gate.kind in (GateKind.H, GateKind.RX, GateKind.RY, GateKind.RZ):
        ops = [_I2] * n
        ops[gate.targets[0]] = _one_qubit(gate)
        return _kron(ops)

    a, b = gate.targets
    if gate.kind is GateKind.CNOT:
        idle = [_I2] * n
        idle[a] = _P0
        flip = [_I2] * n
        flip[a] = _P1
        flip[b] = _X
        return _kron(idle) + _kron(flip)

    # CZ and RZZ are diagonal in the computational basis
    diag = np.empty(2 ** n, dtype=complex)
    for index in range(2 ** n):
        bits = [(index >> (n - 1 - q)) & 1 for q in range(n)]
        if gate.kind is GateKind.CZ:
            diag[index] = -1 if bits[a] and bits[b] else 1
        else:
            parity = bits[a] ^ bits[b]
            diag[index] = np.exp((0.5j if parity else -0.5j) * gate.angle)
    return np.diag(diag)


def dense_unitary(gates: Sequence[Gate], n: int) -> np.ndarray:
    U = np.eye(2 ** n, dtype=complex)
    for gate in gates:
        U = gate_matrix(gate, n) @ U
    return U


def random_circuit(n: int, n_gates: int, rng: np.random.Generator) -> list:
    kinds = list(GateKind)
    gates = []
    for _ in range(n_gates):
        kind = kinds[rng.integers(len(kinds))]
        angle = float(rng.uniform(-math.pi, math.pi))
        if kind in (GateKind.CNOT, GateKind.CZ, GateKind.RZZ):
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(Gate(kind, (int(a), int(b)), angle))
        else:
            gates.append(Gate(kind, (int(rng.integers(n)),), angle))
    return gates


# =====================================================================
# Projected-gradient oracle for the SVM dual
# =====================================================================

def _project(v: np.ndarray, y: np.ndarray, C: float) -> np.ndarray:
    """Euclidean projection onto {0 <= a <= C, y.a = 0} (exact, via breakpoints)."""
    def residual(mu):
        return np.clip(v[None, :] - mu[:, None] * y[None, :], 0.0, C) @ y

    breaks = np.sort(np.concatenate([v * y, (v - C) * y]))
    r = residual(breaks)
    # residual is non-increasing in mu
    k = int(np.searchsorted(-r, 0.0))
    if k == 0:
        mu = breaks[0]
    elif k == breaks.size:
        mu = breaks[-1]
    else:
        lo, hi = breaks[k - 1], breaks[k]
        r_lo, r_hi = r[k - 1], r[k]
        mu = hi if r_lo == r_hi else lo + (hi - lo) * r_lo / (r_lo - r_hi)
    return np.clip(v - mu * y, 0.0, C)


def qp_oracle(K: np.ndarray, y: np.ndarray, C: float, iterations: int = 20000) -> Tuple[np.ndarray, float]:
    """Accelerated projected gradient ascent with restarts. Returns (alpha, dual objective)."""
    y = np.asarray(y, dtype=float)
    Q = np.outer(y, y) * K
    step = 1.0 / max(np.linalg.eigvalsh(Q).max(), 1e-12)

    def objective(a):
        return float(a.sum() - 0.5 * a @ Q @ a)

    alpha = np.zeros(y.size)
    z = alpha.copy()
    t = 1.0
    best = objective(alpha)
    for _ in range(iterations):
        nxt = _project(z + step * (1.0 - Q @ z), y, C)
        value = objective(nxt)
        if value < best:
            z, t = alpha.copy(), 1.0
            continue
        t_next = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        z = nxt + ((t - 1) / t_next) * (nxt - alpha)
        if np.max(np.abs(nxt - alpha)) < 1e-14:
            alpha, best = nxt, value
            break
        alpha, best, t = nxt, value, t_next
    return alpha, best


def oracle_bias(alpha: np.ndarray, K: np.ndarray, y: np.ndarray, C: float, eps: float = 1e-6) -> float:
    """Bias from margin multipliers, or the middle of the feasible interval when none are free."""
    y = np.asarray(y, dtype=float)
    r = y - K @ (alpha * y)
    free = (alpha > eps) & (alpha < C - eps)
    if free.any():
        return float(np.mean(r[free]))
    low = (alpha <= eps) == (y > 0)
    lb = r[low].max() if low.any() else -np.inf
    ub = r[~low].min() if (~low).any() else np.inf
    if not np.isfinite(lb):
        return float(ub)
    if not np.isfinite(ub):
        return float(lb)
    return 0.5 * (lb + ub)


# =====================================================================
# Fixtures
# =====================================================================

@pytest.fixture
def geom() -> PlateGeometry:
    return PlateGeometry()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def synthetic_200():
    return synth_oracle_dataset(200, seed=7)


@pytest.fixture(scope="session")
def synthetic_split(synthetic_200):
    return split_dataset(synthetic_200, test_fraction=0.2, seed=3)


@pytest.fixture
def two_clusters():
    """Linearly separable 2-D clusters, 10 samples each, already in [-1, 1]."""
    gen = np.random.default_rng(99)
    pos = gen.normal([0.5, 0.5], 0.1, size=(10, 2))
    neg = gen.normal([-0.5, -0.5], 0.1, size=(10, 2))
    X = np.vstack([pos, neg])
    y = np.array([1] * 10 + [-1] * 10)
    return X, y


@pytest.fixture
def quantum_scaler() -> FeatureScaler:
    return FeatureScaler(target=(-math.pi / 2, math.pi / 2))
