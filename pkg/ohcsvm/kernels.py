# ---------------------------------------------------------------------
# ohcsvm/kernels.py
# ---------------------------------------------------------------------
# KernelSpec: the tagged union of classical and quantum kernel specs,
# with dispatch for Gram evaluation, serialisation and the trainable
# parameter vector used by kernel-target alignment.
#
# Trainable parameters: RBF -> [log gamma], HE2 -> theta.
# ---------------------------------------------------------------------

import math
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from ohcsvm.classical_kernels import (
    ClassicalKernelSpec,
    ClassicalKind,
    GramMatrix,
    gram_matrix,
)
from ohcsvm.constants_config import CLASSICAL_RANGE, QUANTUM_RANGE
from ohcsvm.errors import NotTrainableError, ParameterError
from ohcsvm.quantum_kernels import (
    EmbeddingKind,
    EmbeddingSpec,
    QuantumKernelSpec,
    quantum_gram,
)

KernelSpec = Union[ClassicalKernelSpec, QuantumKernelSpec]

CLASSICAL_KINDS = {k.value for k in ClassicalKind}
QUANTUM_KINDS = {k.value for k in EmbeddingKind}


def kernel_kind(spec: KernelSpec) -> str:
    if isinstance(spec, QuantumKernelSpec):
        return spec.embedding.kind.value
    return spec.kind.value


def is_quantum(spec: KernelSpec) -> bool:
    return isinstance(spec, QuantumKernelSpec)


def default_target(spec: KernelSpec) -> Tuple[float, float]:
    """Feature range a kernel expects: angles for embeddings, [-1, 1] otherwise."""
    return QUANTUM_RANGE if is_quantum(spec) else CLASSICAL_RANGE


def kernel_matrix(
    spec: KernelSpec,
    X: np.ndarray,
    X2: Optional[np.ndarray] = None,
    workers: int = 1,
) -> GramMatrix:
    if is_quantum(spec):
        return quantum_gram(spec, X, X2, workers=workers)
    return gram_matrix(spec, X, X2)


def trainable_params(spec: KernelSpec) -> np.ndarray:
    if not spec.trainable:
        raise NotTrainableError(f"kernel '{kernel_kind(spec)}' has no trainable parameters")
    if is_quantum(spec):
        return np.array(spec.embedding.theta, dtype=float)
    return np.array([math.log(spec.gamma)])


def with_params(spec: KernelSpec, params: np.ndarray) -> KernelSpec:
    params = np.asarray(params, dtype=float).reshape(-1)
    if not spec.trainable:
        raise NotTrainableError(f"kernel '{kernel_kind(spec)}' has no trainable parameters")
    if is_quantum(spec):
        return spec.with_theta(params)
    return spec.with_gamma(math.exp(float(params[0])))


def kernel_to_dict(spec: KernelSpec) -> Dict[str, Any]:
    if is_quantum(spec):
        return {"family": "quantum", **spec.to_dict()}
    return {"family": "classical", **spec.to_dict()}


def kernel_from_dict(data: Dict[str, Any]) -> KernelSpec:
    family = data.get("family")
    body = {k: v for k, v in data.items() if k != "family"}
    if family == "quantum":
        return QuantumKernelSpec.from_dict(body)
    if family == "classical":
        return ClassicalKernelSpec.from_dict(body)
    raise ParameterError(f"unknown kernel family {family!r}")


def build_kernel(
    kind: str,
    *,
    gamma: float = 1.0,
    c0: float = 0.0,
    degree: int = 3,
    width: int = 3,
    depth: int = 1,
    theta: Tuple[float, ...] = (),
    scaler_fingerprint: Optional[str] = None,
) -> KernelSpec:
    if kind in CLASSICAL_KINDS:
        return ClassicalKernelSpec(kind=ClassicalKind(kind), gamma=gamma, c0=c0, degree=degree)
    if kind in QUANTUM_KINDS:
        embedding = EmbeddingSpec(EmbeddingKind(kind), width, depth, tuple(theta))
        return QuantumKernelSpec(embedding, scaler_fingerprint=scaler_fingerprint)
    raise ParameterError(f"unknown kernel kind {kind!r}")
