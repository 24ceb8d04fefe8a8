# ---------------------------------------------------------------------
# ohcsvm/classical_kernels.py
# ---------------------------------------------------------------------
# RBF, polynomial and sigmoid kernels and their Gram matrices.
# ---------------------------------------------------------------------

import hashlib
import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from ohcsvm.errors import EmptyInputError, ParameterError, ShapeError

# Rows per block when forming pairwise differences
_CHUNK = 256


class ClassicalKind(str, Enum):
    RBF = "rbf"
    POLYNOMIAL = "polynomial"
    SIGMOID = "sigmoid"


@dataclass(frozen=True)
class ClassicalKernelSpec:
    kind: ClassicalKind = ClassicalKind.RBF
    gamma: float = 1.0
    c0: float = 0.0
    degree: int = 3

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ClassicalKind(self.kind))
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ParameterError(f"gamma must be finite and > 0, got {self.gamma}")
        if not math.isfinite(self.c0):
            raise ParameterError(f"c0 must be finite, got {self.c0}")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ParameterError(f"degree must be an integer >= 1, got {self.degree}")

    @property
    def trainable(self) -> bool:
        return self.kind is ClassicalKind.RBF

    @property
    def tag(self) -> str:
        return self.kind.value

    def with_gamma(self, gamma: float) -> "ClassicalKernelSpec":
        return replace(self, gamma=float(gamma))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "gamma": self.gamma,
            "c0": self.c0,
            "degree": int(self.degree),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ClassicalKernelSpec":
        return cls(
            kind=ClassicalKind(data["kind"]),
            gamma=float(data.get("gamma", 1.0)),
            c0=float(data.get("c0", 0.0)),
            degree=int(data.get("degree", 3)),
        )

    @property
    def fingerprint(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha1(payload).hexdigest()[:12]


@dataclass(frozen=True)
class GramMatrix:
    """Kernel matrix entries tagged with the fingerprint of the kernel that made them."""

    entries: np.ndarray
    kernel: str

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    @property
    def shape(self):
        return self.entries.shape


def as_samples(X: np.ndarray, name: str = "X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {X.shape}")
    if X.shape[0] == 0:
        raise EmptyInputError(f"{name} holds no samples")
    return X


def squared_distances(X: np.ndarray, X2: np.ndarray) -> np.ndarray:
    """Pairwise ||x - x'||^2 from explicit differences (exactly symmetric, zero diagonal)."""
    out = np.empty((X.shape[0], X2.shape[0]))
    for start in range(0, X.shape[0], _CHUNK):
        diff = X[start:start + _CHUNK, None, :] - X2[None, :, :]
        out[start:start + _CHUNK] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


def _apply(spec: ClassicalKernelSpec, X: np.ndarray, X2: np.ndarray) -> np.ndarray:
    if spec.kind is ClassicalKind.RBF:
        return np.exp(-spec.gamma * squared_distances(X, X2))
    linear = spec.gamma * (X @ X2.T) + spec.c0
    if spec.kind is ClassicalKind.POLYNOMIAL:
        return linear ** int(spec.degree)
    return np.tanh(linear)


def classical_kernel(spec: ClassicalKernelSpec, x: np.ndarray, x2: np.ndarray) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    x2 = np.asarray(x2, dtype=float).reshape(-1)
    if x.shape != x2.shape:
        raise ShapeError(f"sample lengths differ: {x.size} vs {x2.size}")
    return float(_apply(spec, x[None, :], x2[None, :])[0, 0])


def gram_matrix(
    spec: ClassicalKernelSpec, X: np.ndarray, X2: Optional[np.ndarray] = None
) -> GramMatrix:
    """
    K[i][j] = k(X[i], X2[j]). With X2 omitted the matrix is square,
    symmetrized, and (for RBF) carries an exact unit diagonal.
    """
    X = as_samples(X)
    if X2 is None:
        K = _apply(spec, X, X)
        K = 0.5 * (K + K.T)
        if spec.kind is ClassicalKind.RBF:
            np.fill_diagonal(K, 1.0)
    else:
        X2 = as_samples(X2, "X2")
        if X2.shape[1] != X.shape[1]:
            raise ShapeError(f"feature counts differ: {X.shape[1]} vs {X2.shape[1]}")
        K = _apply(spec, X, X2)
    return GramMatrix(entries=K, kernel=spec.fingerprint)
