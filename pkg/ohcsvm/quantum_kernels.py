# ---------------------------------------------------------------------
# ohcsvm/quantum_kernels.py
# ---------------------------------------------------------------------
# IQP and HE2 embedding circuits and the fidelity kernel they define.
#
# Features are assigned cyclically: qubit q encodes x[q mod len(x)].
#
#   IQP layer : H on every qubit, RZ(x_q), RZZ(x_q * x_q') for q < q'
#   HE2 layer : RX(x_q), RY(theta[l*W + q]), CZ ring q -> (q+1) mod W
#
# The RY and CZ gates of the last HE2 layer act after the last data
# rotation and cancel in the fidelity, so only theta[:(D-1)*W] shapes
# the kernel. A D=1 HE2 kernel does not depend on theta at all.
# ---------------------------------------------------------------------

import hashlib
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ohcsvm.classical_kernels import GramMatrix, as_samples
from ohcsvm.constants_config import EMBEDDING_DEPTHS, EMBEDDING_WIDTHS, MAX_QUBITS
from ohcsvm.errors import CapacityError, EmbeddingSpecError, ParameterError, ShapeError
from ohcsvm.quantum_simulator import (
    Gate,
    GateKind,
    Statevector,
    adjoint_circuit,
    init_state,
    prob_all_zeros,
    run_circuit,
)

logger = logging.getLogger(__name__)


class EmbeddingKind(str, Enum):
    IQP = "iqp"
    HE2 = "he2"


class KernelMethod(str, Enum):
    OVERLAP = "overlap"
    ADJOINT = "adjoint"


@dataclass(frozen=True)
class EmbeddingSpec:
    kind: EmbeddingKind
    width: int
    depth: int
    theta: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", EmbeddingKind(self.kind))
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))
        if self.width < 1 or self.depth < 1:
            raise EmbeddingSpecError(
                f"width and depth must be >= 1, got W={self.width} D={self.depth}"
            )
        if self.width > MAX_QUBITS:
            raise CapacityError(f"width {self.width} exceeds {MAX_QUBITS} qubits")
        expected = self.n_params
        if len(self.theta) != expected:
            raise EmbeddingSpecError(
                f"{self.kind.value} W={self.width} D={self.depth} takes {expected} "
                f"angle(s), got {len(self.theta)}"
            )
        if not all(math.isfinite(t) for t in self.theta):
            raise EmbeddingSpecError("theta holds non-finite angles")

    @property
    def n_params(self) -> int:
        return self.width * self.depth if self.kind is EmbeddingKind.HE2 else 0

    @property
    def tag(self) -> str:
        return f"W{self.width}D{self.depth}"

    @property
    def trainable(self) -> bool:
        return self.kind is EmbeddingKind.HE2

    def with_theta(self, theta: Sequence[float]) -> "EmbeddingSpec":
        return replace(self, theta=tuple(float(t) for t in theta))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "width": self.width,
            "depth": self.depth,
            "theta": list(self.theta),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EmbeddingSpec":
        return cls(
            kind=EmbeddingKind(data["kind"]),
            width=int(data["width"]),
            depth=int(data["depth"]),
            theta=tuple(data.get("theta", ())),
        )


@dataclass(frozen=True)
class QuantumKernelSpec:
    """Fidelity kernel of an embedding; inputs must be scaled by the referenced scaler."""

    embedding: EmbeddingSpec
    scaler_fingerprint: Optional[str] = None
    method: KernelMethod = KernelMethod.OVERLAP

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", KernelMethod(self.method))

    @property
    def trainable(self) -> bool:
        return self.embedding.trainable

    @property
    def tag(self) -> str:
        return f"{self.embedding.kind.value}-{self.embedding.tag}"

    def with_theta(self, theta: Sequence[float]) -> "QuantumKernelSpec":
        return replace(self, embedding=self.embedding.with_theta(theta))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "embedding": self.embedding.to_dict(),
            "scaler_fingerprint": self.scaler_fingerprint,
            "method": self.method.value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "QuantumKernelSpec":
        return cls(
            embedding=EmbeddingSpec.from_dict(data["embedding"]),
            scaler_fingerprint=data.get("scaler_fingerprint"),
            method=KernelMethod(data.get("method", KernelMethod.OVERLAP.value)),
        )

    @property
    def fingerprint(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha1(payload).hexdigest()[:12]


AnySpec = Union[EmbeddingSpec, QuantumKernelSpec]


def _embedding_of(spec: AnySpec) -> EmbeddingSpec:
    return spec.embedding if isinstance(spec, QuantumKernelSpec) else spec


# =====================================================================
# Parameters and grids
# =====================================================================

def init_theta(width: int, depth: int, seed: int) -> Tuple[float, ...]:
    """HE2 angles drawn uniformly from [-pi, pi]."""
    rng = np.random.default_rng(seed)
    return tuple(float(t) for t in rng.uniform(-math.pi, math.pi, size=width * depth))


def he2_embedding(width: int, depth: int, seed: int) -> EmbeddingSpec:
    return EmbeddingSpec(EmbeddingKind.HE2, width, depth, init_theta(width, depth, seed))


def default_embedding_grid(seed: int = 0) -> List[EmbeddingSpec]:
    """The nine HE2 embeddings W in {3, 4, 6} x D in {1, 2, 3}, tagged W{w}D{d}."""
    return [
        he2_embedding(w, d, seed)
        for w in EMBEDDING_WIDTHS
        for d in EMBEDDING_DEPTHS
    ]


# =====================================================================
# Circuits and states
# =====================================================================

def _features(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size == 0:
        raise ShapeError("feature vector is empty")
    if not np.all(np.isfinite(x)):
        raise ParameterError(f"feature vector holds non-finite values: {x.tolist()}")
    return x


def embedding_circuit(spec: AnySpec, x: np.ndarray) -> List[Gate]:
    emb = _embedding_of(spec)
    x = _features(x)
    W = emb.width
    angles = [float(x[q % x.size]) for q in range(W)]

    gates: List[Gate] = []
    for layer in range(emb.depth):
        if emb.kind is EmbeddingKind.IQP:
            gates += [Gate(GateKind.H, (q,)) for q in range(W)]
            gates += [Gate(GateKind.RZ, (q,), angles[q]) for q in range(W)]
            gates += [
                Gate(GateKind.RZZ, (q, p), angles[q] * angles[p])
                for q in range(W)
                for p in range(q + 1, W)
            ]
        else:
            gates += [Gate(GateKind.RX, (q,), angles[q]) for q in range(W)]
            gates += [
                Gate(GateKind.RY, (q,), emb.theta[layer * W + q]) for q in range(W)
            ]
            if W == 2:
                gates.append(Gate(GateKind.CZ, (0, 1)))
            elif W > 2:
                gates += [Gate(GateKind.CZ, (q, (q + 1) % W)) for q in range(W)]
    return gates


def embed_state(spec: AnySpec, x: np.ndarray) -> Statevector:
    emb = _embedding_of(spec)
    return run_circuit(embedding_circuit(emb, x), init_state(emb.width))


def quantum_kernel(
    spec: AnySpec,
    x: np.ndarray,
    x2: np.ndarray,
    method: Union[KernelMethod, str] = KernelMethod.OVERLAP,
) -> float:
    """
    Fidelity |<psi(x)|psi(x2)>|^2. The adjoint method prepares
    U^dagger(x2) U(x) |0> and reads the all-zeros probability instead.
    """
    emb = _embedding_of(spec)
    if KernelMethod(method) is KernelMethod.OVERLAP:
        a = embed_state(emb, x).amps
        b = embed_state(emb, x2).amps
        value = abs(np.vdot(a, b)) ** 2
    else:
        gates = embedding_circuit(emb, x) + adjoint_circuit(embedding_circuit(emb, x2))
        value = prob_all_zeros(run_circuit(gates, init_state(emb.width)))
    return float(min(max(value, 0.0), 1.0))


class StateCache:
    """
    Embedded states keyed by sample coordinates. Filled once by `build`,
    read-only afterwards, so worker threads may share it.
    """

    def __init__(self, spec: AnySpec) -> None:
        self.embedding = _embedding_of(spec)
        self._states: Dict[bytes, np.ndarray] = {}

    def build(self, X: np.ndarray, workers: int = 1) -> "StateCache":
        pending: Dict[bytes, np.ndarray] = {}
        for row in X:
            key = row.tobytes()
            if key not in self._states and key not in pending:
                pending[key] = row
        rows = list(pending.values())
        if workers > 1 and len(rows) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                states = list(pool.map(lambda r: embed_state(self.embedding, r).amps, rows))
        else:
            states = [embed_state(self.embedding, r).amps for r in rows]
        self._states.update(zip(pending.keys(), states))
        return self

    def matrix(self, X: np.ndarray) -> np.ndarray:
        """Rows are the cached states of X, shape (len(X), 2**W)."""
        return np.vstack([self._states[row.tobytes()] for row in X])

    def __len__(self) -> int:
        return len(self._states)


def _adjoint_gram(
    kernel: QuantumKernelSpec, X: np.ndarray, X2: Optional[np.ndarray], workers: int
) -> GramMatrix:
    square = X2 is None
    cols = X if square else X2
    pairs = [
        (i, j)
        for i in range(X.shape[0])
        for j in range(i + 1 if square else 0, cols.shape[0])
    ]

    def entry(pair: Tuple[int, int]) -> float:
        i, j = pair
        return quantum_kernel(kernel.embedding, X[i], cols[j], KernelMethod.ADJOINT)

    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(entry, pairs))
    else:
        values = [entry(p) for p in pairs]

    K = np.zeros((X.shape[0], cols.shape[0]))
    for (i, j), value in zip(pairs, values):
        K[i, j] = value
    if square:
        K = K + K.T
        np.fill_diagonal(K, 1.0)

    logger.debug("quantum Gram %s for %s (adjoint, %d circuits)", K.shape, kernel.tag, len(pairs))
    return GramMatrix(entries=K, kernel=kernel.fingerprint)


def quantum_gram(
    spec: AnySpec,
    X: np.ndarray,
    X2: Optional[np.ndarray] = None,
    workers: int = 1,
) -> GramMatrix:
    """
    Fidelity Gram matrix. The overlap method reads cached states (each distinct
    sample embedded once); the adjoint method runs U^dagger(x2) U(x) per pair.
    The square case is symmetrized with an exact unit diagonal.
    """
    kernel = spec if isinstance(spec, QuantumKernelSpec) else QuantumKernelSpec(spec)
    X = as_samples(X)
    if kernel.method is KernelMethod.ADJOINT:
        return _adjoint_gram(kernel, X, None if X2 is None else as_samples(X2, "X2"), workers)

    cache = StateCache(kernel.embedding).build(X, workers)
    S = cache.matrix(X)

    if X2 is None:
        K = np.abs(S.conj() @ S.T) ** 2
        K = 0.5 * (K + K.T)
        np.fill_diagonal(K, 1.0)
    else:
        X2 = as_samples(X2, "X2")
        cache.build(X2, workers)
        K = np.abs(S.conj() @ cache.matrix(X2).T) ** 2

    logger.debug("quantum Gram %s for %s (%d cached states)", K.shape, kernel.tag, len(cache))
    return GramMatrix(entries=np.clip(K, 0.0, 1.0), kernel=kernel.fingerprint)
