# ---------------------------------------------------------------------
# ohcsvm/svm_solver.py
# ---------------------------------------------------------------------
# Soft-margin SVM dual solved by SMO on a precomputed kernel matrix.
#
#   min_a  1/2 a^T Q a - 1^T a,   Q = (y y^T) * K
#   s.t.   0 <= a_m <= C,  sum_m a_m y_m = 0
#
# Working pair: maximal KKT violation, lowest index on ties.
# ---------------------------------------------------------------------

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from ohcsvm.constants_config import (
    CURVATURE_EPS,
    FAILED,
    NON_FAILED,
    SMO_ITER_PER_SAMPLE,
    SMO_TOL,
    SUPPORT_EPS,
)
from ohcsvm.data_pipeline import FeatureScaler
from ohcsvm.errors import DegenerateLabelsError, ParameterError, ShapeError
from ohcsvm.kernels import KernelSpec, kernel_from_dict, kernel_matrix, kernel_to_dict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverDiagnostics:
    iterations: int
    kkt_violation: float
    converged: bool
    objective: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iterations": self.iterations,
            "kkt_violation": self.kkt_violation,
            "converged": self.converged,
            "objective": self.objective,
        }


@dataclass(frozen=True)
class DualSolution:
    """Dual multipliers and bias for one training set; no samples or kernel attached."""

    alpha: np.ndarray
    b: float
    support_indices: np.ndarray
    y_train: np.ndarray
    C: float

    def decision_from_gram(self, K_cross: np.ndarray) -> np.ndarray:
        """f for rows of K_cross[i][m] = k(x_i, x_m) against the training samples."""
        sv = self.support_indices
        coef = self.alpha[sv] * self.y_train[sv]
        return np.asarray(K_cross)[:, sv] @ coef + self.b


@dataclass(frozen=True)
class SvmModel:
    alpha: np.ndarray
    b: float
    support_indices: np.ndarray
    y_train: np.ndarray
    X_train: np.ndarray
    kernel: KernelSpec
    C: float
    scaler: Optional[FeatureScaler] = None

    @property
    def support_vectors(self) -> np.ndarray:
        return self.X_train[self.support_indices]

    @property
    def dual_coef(self) -> np.ndarray:
        sv = self.support_indices
        return self.alpha[sv] * self.y_train[sv]

    def to_dict(self) -> Dict[str, Any]:
        """Model document; only support vectors are stored."""
        sv = self.support_indices
        return {
            "C": self.C,
            "kernel": kernel_to_dict(self.kernel),
            "scaler": self.scaler.to_dict() if self.scaler else None,
            "alpha": self.alpha[sv].tolist(),
            "b": self.b,
            "support_vectors": self.X_train[sv].tolist(),
            "support_labels": self.y_train[sv].astype(int).tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SvmModel":
        alpha = np.asarray(data["alpha"], dtype=float)
        X = np.asarray(data["support_vectors"], dtype=float).reshape(alpha.size, -1)
        y = np.asarray(data["support_labels"], dtype=int)
        if y.size != alpha.size:
            raise ShapeError(f"{alpha.size} multiplier(s) but {y.size} support label(s)")
        scaler = data.get("scaler")
        return cls(
            alpha=alpha,
            b=float(data["b"]),
            support_indices=np.arange(alpha.size),
            y_train=y,
            X_train=X,
            kernel=kernel_from_dict(data["kernel"]),
            C=float(data["C"]),
            scaler=FeatureScaler.from_dict(scaler) if scaler else None,
        )


def save_model(model: SvmModel, file: Union[str, Path]) -> Path:
    file = Path(file)
    file.parent.mkdir(parents=True, exist_ok=True)
    file.write_text(json.dumps(model.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return file


def load_model(file: Union[str, Path]) -> SvmModel:
    return SvmModel.from_dict(json.loads(Path(file).read_text(encoding="utf-8")))


# =====================================================================
# SMO
# =====================================================================

def dual_objective(alpha: np.ndarray, K: np.ndarray, y: np.ndarray) -> float:
    """Dual value sum(a) - 1/2 a^T Q a (the quantity SMO maximises)."""
    ay = np.asarray(alpha) * np.asarray(y)
    return float(np.sum(alpha) - 0.5 * ay @ np.asarray(K) @ ay)


def _check_problem(K: np.ndarray, y: np.ndarray, C: float, tol: float) -> Tuple[np.ndarray, np.ndarray]:
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ShapeError(f"kernel matrix must be square, got {K.shape}")
    if K.shape[0] != y.size:
        raise ShapeError(f"{y.size} label(s) for a {K.shape[0]}x{K.shape[0]} kernel")
    if not np.all(np.abs(y) == 1):
        raise ParameterError("labels must be +1 or -1")
    if np.unique(y).size < 2:
        raise DegenerateLabelsError(f"all {y.size} training labels are {int(y[0]):+d}")
    if not (math.isfinite(C) and C > 0):
        raise ParameterError(f"C must be finite and > 0, got {C}")
    if not (math.isfinite(tol) and tol > 0):
        raise ParameterError(f"tol must be finite and > 0, got {tol}")
    return K, y


def _violation_sets(alpha: np.ndarray, y: np.ndarray, C: float) -> Tuple[np.ndarray, np.ndarray]:
    pos = y > 0
    up = (pos & (alpha < C)) | (~pos & (alpha > 0))
    low = (pos & (alpha > 0)) | (~pos & (alpha < C))
    return up, low


def _bias(alpha: np.ndarray, K: np.ndarray, y: np.ndarray, C: float, support_eps: float) -> float:
    r = y - K @ (alpha * y)
    free = (alpha > support_eps) & (alpha < C - support_eps)
    if free.any():
        return float(np.mean(r[free]))
    pos = y > 0
    at_zero = alpha <= support_eps
    at_c = alpha >= C - support_eps
    lower = r[(at_zero & pos) | (at_c & ~pos)]
    upper = r[(at_zero & ~pos) | (at_c & pos)]
    lb = lower.max() if lower.size else -np.inf
    ub = upper.min() if upper.size else np.inf
    if not np.isfinite(lb):
        return float(ub)
    if not np.isfinite(ub):
        return float(lb)
    return float(0.5 * (lb + ub))


def solve_dual(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    tol: float = SMO_TOL,
    max_iter: Optional[int] = None,
    support_eps: float = SUPPORT_EPS,
) -> Tuple[DualSolution, SolverDiagnostics]:
    """
    SMO on the dual. Stops when the maximal KKT violation m - M <= tol.

    A pair with curvature eta <= 1e-12 is replaced by the next-best partner;
    when no partner with positive curvature remains the solver stops and
    reports converged=False with the current (best) iterate.
    """
    K, y = _check_problem(K, y, C, tol)
    M = y.size
    if max_iter is None:
        max_iter = SMO_ITER_PER_SAMPLE * M
    if max_iter < 1:
        raise ParameterError(f"max_iter must be >= 1, got {max_iter}")

    diag = np.diag(K).copy()
    alpha = np.zeros(M)
    G = -np.ones(M)                 # gradient of the minimised objective, Q a - 1
    converged = False
    stalled = False
    iterations = 0
    gap = np.inf

    while iterations < max_iter:
        score = -y * G
        up, low = _violation_sets(alpha, y, C)
        up_scores = np.where(up, score, -np.inf)
        low_scores = np.where(low, score, np.inf)
        i = int(np.argmax(up_scores))
        j = int(np.argmin(low_scores))
        gap = up_scores[i] - low_scores[j]
        if gap <= tol:
            converged = True
            break

        eta = diag[i] + diag[j] - 2 * K[i, j]
        if eta <= CURVATURE_EPS:
            candidates = np.flatnonzero(low & (score < up_scores[i] - tol))
            candidates = candidates[np.lexsort((candidates, score[candidates]))]
            etas = diag[i] + diag[candidates] - 2 * K[i, candidates]
            usable = candidates[etas > CURVATURE_EPS]
            if usable.size == 0:
                stalled = True
                break
            j = int(usable[0])
            eta = diag[i] + diag[j] - 2 * K[i, j]

        bound_i = C - alpha[i] if y[i] > 0 else alpha[i]
        bound_j = alpha[j] if y[j] > 0 else C - alpha[j]
        step = (up_scores[i] - score[j]) / eta
        lam = min(step, bound_i, bound_j)

        old_i, old_j = alpha[i], alpha[j]
        if lam >= bound_i:
            alpha[i] = C if y[i] > 0 else 0.0
        else:
            alpha[i] = old_i + y[i] * lam
        if lam >= bound_j:
            alpha[j] = 0.0 if y[j] > 0 else C
        else:
            alpha[j] = old_j - y[j] * lam
        alpha[i] = min(max(alpha[i], 0.0), C)
        alpha[j] = min(max(alpha[j], 0.0), C)

        d_i = alpha[i] - old_i
        d_j = alpha[j] - old_j
        G += y * (K[:, i] * (y[i] * d_i) + K[:, j] * (y[j] * d_j))
        iterations += 1

    if not converged:
        score = -y * G
        up, low = _violation_sets(alpha, y, C)
        if up.any() and low.any():
            gap = float(np.max(score[up]) - np.min(score[low]))
        logger.warning(
            "SMO %s after %d iteration(s): KKT violation %.3e > tol %.1e (C=%g, M=%d)",
            "stalled on flat curvature" if stalled else "hit max_iter",
            iterations, gap, tol, C, M,
        )

    objective = float(np.sum(alpha) - 0.5 * alpha @ (G + 1.0))
    solution = DualSolution(
        alpha=alpha,
        b=_bias(alpha, K, y, C, support_eps),
        support_indices=np.flatnonzero(alpha > support_eps),
        y_train=y.astype(int),
        C=float(C),
    )
    diagnostics = SolverDiagnostics(
        iterations=iterations,
        kkt_violation=float(max(gap, 0.0)),
        converged=converged,
        objective=objective,
    )
    logger.debug("SMO: %s", diagnostics)
    return solution, diagnostics


# =====================================================================
# Fit and predict
# =====================================================================

def model_from_solution(
    solution: DualSolution,
    X_train: np.ndarray,
    kernel: KernelSpec,
    scaler: Optional[FeatureScaler] = None,
) -> SvmModel:
    return SvmModel(
        alpha=solution.alpha,
        b=solution.b,
        support_indices=solution.support_indices,
        y_train=solution.y_train,
        X_train=np.asarray(X_train, dtype=float),
        kernel=kernel,
        C=solution.C,
        scaler=scaler,
    )


def fit_svm(
    kernel: KernelSpec,
    X: np.ndarray,
    y: np.ndarray,
    C: float,
    tol: float = SMO_TOL,
    max_iter: Optional[int] = None,
    scaler: Optional[FeatureScaler] = None,
    workers: int = 1,
) -> Tuple[SvmModel, SolverDiagnostics]:
    """Gram matrix of the scaled training samples, SMO, model assembly."""
    K = np.asarray(kernel_matrix(kernel, X, workers=workers))
    solution, diagnostics = solve_dual(K, y, C, tol=tol, max_iter=max_iter)
    return model_from_solution(solution, X, kernel, scaler), diagnostics


def decision_values(model: SvmModel, X: np.ndarray, workers: int = 1) -> np.ndarray:
    """f(x) = sum over support vectors of a_m y_m k(x_m, x) + b, for each row of X."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if model.support_indices.size == 0:
        return np.full(X.shape[0], model.b)
    K_cross = np.asarray(kernel_matrix(model.kernel, X, model.support_vectors, workers=workers))
    return K_cross @ model.dual_coef + model.b


def decision_value(model: SvmModel, x: np.ndarray) -> float:
    return float(decision_values(model, np.asarray(x, dtype=float).reshape(1, -1))[0])


def labels_from_decision(f: np.ndarray) -> np.ndarray:
    """sign(f) with f == 0 mapped to +1."""
    return np.where(np.asarray(f) >= 0, NON_FAILED, FAILED)


def predict(model: SvmModel, X: np.ndarray, workers: int = 1) -> np.ndarray:
    return labels_from_decision(decision_values(model, X, workers))
