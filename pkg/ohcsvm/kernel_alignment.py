# ---------------------------------------------------------------------
# ohcsvm/kernel_alignment.py
# ---------------------------------------------------------------------
# Kernel alignment, kernel-target alignment (KTA) and its maximisation
# with mini-batch Adam ascent.
#
# RBF is trained in log(gamma) with an analytic gradient; HE2 angles
# are trained directly with central finite differences.
# ---------------------------------------------------------------------

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ohcsvm.classical_kernels import ClassicalKernelSpec, as_samples, squared_distances
from ohcsvm.constants_config import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPS,
    FD_STEP,
    KTA_BATCH_SIZE,
    KTA_ITERATIONS,
    KTA_LEARNING_RATE,
    KTA_LOG_EVERY,
)
from ohcsvm.errors import (
    DegenerateKernelError,
    KtaDivergenceError,
    NotTrainableError,
    ParameterError,
    ShapeError,
)
from ohcsvm.kernels import (
    KernelSpec,
    is_quantum,
    kernel_kind,
    kernel_matrix,
    trainable_params,
    with_params,
)

logger = logging.getLogger(__name__)


# =====================================================================
# Alignment
# =====================================================================

def alignment(K1: np.ndarray, K2: np.ndarray) -> float:
    """<K1, K2>_F / (||K1||_F ||K2||_F)."""
    K1 = np.asarray(K1, dtype=float)
    K2 = np.asarray(K2, dtype=float)
    if K1.ndim != 2 or K1.shape[0] != K1.shape[1] or K1.shape != K2.shape:
        raise ShapeError(f"alignment needs equal square matrices, got {K1.shape} and {K2.shape}")
    n1 = np.linalg.norm(K1)
    n2 = np.linalg.norm(K2)
    if n1 == 0 or n2 == 0:
        raise DegenerateKernelError("kernel matrix has zero Frobenius norm")
    return float(np.sum(K1 * K2) / (n1 * n2))


def _labels(y: np.ndarray, size: int) -> np.ndarray:
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != size:
        raise ShapeError(f"{y.size} label(s) for a {size}x{size} kernel")
    if not np.all(np.abs(y) == 1):
        raise ParameterError("labels must be +1 or -1")
    return y


def kta(K: np.ndarray, y: np.ndarray) -> float:
    """Kernel-target alignment y^T K y / (M ||K||_F)."""
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ShapeError(f"kta needs a square matrix, got {K.shape}")
    y = _labels(y, K.shape[0])
    norm = np.linalg.norm(K)
    if norm == 0:
        raise DegenerateKernelError("kernel matrix has zero Frobenius norm")
    return float(y @ K @ y / (K.shape[0] * norm))


# =====================================================================
# Gradients
# =====================================================================

def _rbf_gradient(spec: ClassicalKernelSpec, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    D = squared_distances(X, X)
    K = np.exp(-spec.gamma * D)
    dK = -spec.gamma * D * K          # d K / d log(gamma)
    M = K.shape[0]
    a = y @ K @ y
    norm = np.linalg.norm(K)
    da = y @ dK @ y
    dnorm = np.sum(dK * K) / norm
    return np.array([(da * norm - a * dnorm) / (M * norm ** 2)])


def _finite_difference(
    spec: KernelSpec, X: np.ndarray, y: np.ndarray, h: float, workers: int
) -> np.ndarray:
    params = trainable_params(spec)
    grad = np.empty_like(params)
    for p in range(params.size):
        step = np.zeros_like(params)
        step[p] = h
        up = kta(kernel_matrix(with_params(spec, params + step), X, workers=workers), y)
        down = kta(kernel_matrix(with_params(spec, params - step), X, workers=workers), y)
        grad[p] = (up - down) / (2 * h)
    return grad


def kta_gradient(
    spec: KernelSpec,
    X: np.ndarray,
    y: np.ndarray,
    fd_step: float = FD_STEP,
    workers: int = 1,
) -> np.ndarray:
    """Gradient of KTA w.r.t. the trainable parameters (see kernels.trainable_params)."""
    if not spec.trainable:
        raise NotTrainableError(f"kernel '{kernel_kind(spec)}' has no trainable parameters")
    X = as_samples(X)
    y = _labels(y, X.shape[0])
    if is_quantum(spec):
        return _finite_difference(spec, X, y, fd_step, workers)
    return _rbf_gradient(spec, X, y)


# =====================================================================
# Adam ascent
# =====================================================================

@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS

    @classmethod
    def zeros(cls, size: int, **kwargs) -> "AdamState":
        return cls(m=np.zeros(size), v=np.zeros(size), **kwargs)

    def ascend(self, grad: np.ndarray, lr: float) -> np.ndarray:
        """Bias-corrected Adam increment for maximisation."""
        if grad.shape != self.m.shape:
            raise ShapeError(f"gradient shape {grad.shape} != moment shape {self.m.shape}")
        self.step += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad ** 2
        m_hat = self.m / (1 - self.beta1 ** self.step)
        v_hat = self.v / (1 - self.beta2 ** self.step)
        return lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass(frozen=True)
class KtaConfig:
    iterations: int = KTA_ITERATIONS
    learning_rate: float = KTA_LEARNING_RATE
    batch_size: int = KTA_BATCH_SIZE
    seed: int = 0
    log_every: int = KTA_LOG_EVERY
    fd_step: float = FD_STEP
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS

    def __post_init__(self) -> None:
        if self.iterations < 0:
            raise ParameterError(f"iterations must be >= 0, got {self.iterations}")
        if self.learning_rate <= 0:
            raise ParameterError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 2:
            raise ParameterError(f"batch_size must be >= 2, got {self.batch_size}")
        if self.log_every < 1:
            raise ParameterError(f"log_every must be >= 1, got {self.log_every}")


@dataclass
class KtaReport:
    """Full-data KTA at each logged iteration of one training run."""

    kernel: str
    initial_params: List[float]
    final_params: List[float] = field(default_factory=list)
    history: List[Tuple[int, float]] = field(default_factory=list)
    config: Optional[KtaConfig] = None

    @property
    def initial_kta(self) -> float:
        return self.history[0][1]

    @property
    def final_kta(self) -> float:
        return self.history[-1][1]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.history, columns=["iteration", "kta"])

    def to_dict(self) -> Dict[str, Any]:
        config = self.config or KtaConfig()
        return {
            "kernel": self.kernel,
            "initial_kta": self.initial_kta,
            "final_kta": self.final_kta,
            "initial_params": list(self.initial_params),
            "final_params": list(self.final_params),
            "iterations": config.iterations,
            "learning_rate": config.learning_rate,
            "batch_size": config.batch_size,
            "seed": config.seed,
        }


def train_kta(
    spec: KernelSpec,
    X: np.ndarray,
    y: np.ndarray,
    config: KtaConfig = KtaConfig(),
    workers: int = 1,
) -> Tuple[KernelSpec, KtaReport]:
    """
    Maximise KTA over the kernel's trainable parameters. Each step draws a
    fresh mini-batch without replacement; the report logs full-data KTA at
    iteration 0, every `log_every` steps and the final step.
    """
    params = trainable_params(spec)
    X = as_samples(X)
    y = _labels(y, X.shape[0])
    M = X.shape[0]
    batch = min(config.batch_size, M)

    def full_kta(p: np.ndarray) -> float:
        return kta(kernel_matrix(with_params(spec, p), X, workers=workers), y)

    report = KtaReport(
        kernel=kernel_kind(spec),
        initial_params=params.tolist(),
        history=[(0, full_kta(params))],
        config=config,
    )
    logger.info("KTA %s: initial %.6f (M=%d, batch=%d)", report.kernel, report.initial_kta, M, batch)

    if config.iterations == 0:
        report.final_params = params.tolist()
        return spec, report

    rng = np.random.default_rng(config.seed)
    adam = AdamState.zeros(params.size, beta1=config.beta1, beta2=config.beta2, eps=config.eps)

    for it in range(1, config.iterations + 1):
        idx = np.sort(rng.choice(M, size=batch, replace=False))
        grad = kta_gradient(with_params(spec, params), X[idx], y[idx], config.fd_step, workers)
        if not np.all(np.isfinite(grad)):
            raise KtaDivergenceError(
                f"non-finite KTA gradient at iteration {it}", last_good=params, iteration=it
            )
        params = params + adam.ascend(grad, config.learning_rate)

        if it % config.log_every == 0 or it == config.iterations:
            value = full_kta(params)
            report.history.append((it, value))
            logger.debug("KTA %s: iteration %d -> %.6f", report.kernel, it, value)

    report.final_params = params.tolist()
    logger.info("KTA %s: final %.6f after %d iteration(s)", report.kernel, report.final_kta, config.iterations)
    return with_params(spec, params), report


def embedding_sweep(
    embeddings: Sequence[KernelSpec],
    X: np.ndarray,
    y: np.ndarray,
    config: KtaConfig = KtaConfig(),
    workers: int = 1,
) -> pd.DataFrame:
    """Full-data KTA of each trainable embedding before and after training."""
    records = []
    for spec in embeddings:
        trained, report = train_kta(spec, X, y, config, workers)
        embedding = trained.embedding
        records.append({
            "tag": embedding.tag,
            "width": embedding.width,
            "depth": embedding.depth,
            "n_params": embedding.n_params,
            "initial_kta": report.initial_kta,
            "final_kta": report.final_kta,
        })
        logger.info(
            "sweep %s: KTA %.4f -> %.4f", embedding.tag, report.initial_kta, report.final_kta
        )
    return pd.DataFrame(
        records, columns=["tag", "width", "depth", "n_params", "initial_kta", "final_kta"]
    )
