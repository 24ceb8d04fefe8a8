# ---------------------------------------------------------------------
# ohcsvm/model_eval.py
# ---------------------------------------------------------------------
# Classification metrics, grid-search cross-validation over C and
# learning curves over nested stratified training subsets.
#
# Positive class is +1 (non-failed). Ratios with a zero denominator are
# reported as None.
# ---------------------------------------------------------------------

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, TypeVar

import numpy as np
import pandas as pd

from ohcsvm.constants_config import (
    DEFAULT_C_GRID,
    DEFAULT_FOLDS,
    DEFAULT_FRACTIONS,
    NON_FAILED,
    SMO_TOL,
)
from ohcsvm.data_pipeline import Dataset
from ohcsvm.errors import (
    DegenerateLabelsError,
    EmptyEvaluationError,
    ParameterError,
    ShapeError,
    StratificationError,
)
from ohcsvm.kernels import KernelSpec, kernel_matrix
from ohcsvm.svm_solver import labels_from_decision, solve_dual

logger = logging.getLogger(__name__)

METRIC_NAMES = ("accuracy", "jaccard", "precision", "recall", "specificity")

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """map() over a thread pool; results keep the input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# =====================================================================
# Metrics
# =====================================================================

@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ParameterError(f"confusion counts must be >= 0, got {self}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsRecord:
    accuracy: float
    jaccard: Optional[float]
    precision: Optional[float]
    recall: Optional[float]
    specificity: Optional[float]

    def to_dict(self) -> Dict[str, Optional[float]]:
        return {name: getattr(self, name) for name in METRIC_NAMES}


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


def classification_metrics(counts: ConfusionCounts) -> MetricsRecord:
    if counts.total == 0:
        raise EmptyEvaluationError("no evaluated samples")
    return MetricsRecord(
        accuracy=(counts.tp + counts.tn) / counts.total,
        jaccard=_ratio(counts.tp, counts.tp + counts.fp + counts.fn),
        precision=_ratio(counts.tp, counts.tp + counts.fp),
        recall=_ratio(counts.tp, counts.tp + counts.fn),
        specificity=_ratio(counts.tn, counts.tn + counts.fp),
    )


def confusion_counts(y_true: Sequence[int], y_pred: Sequence[int]) -> ConfusionCounts:
    y_true = np.asarray(y_true).reshape(-1)
    y_pred = np.asarray(y_pred).reshape(-1)
    if y_true.shape != y_pred.shape:
        raise ShapeError(f"{y_true.size} true label(s) vs {y_pred.size} prediction(s)")
    pos_true, pos_pred = y_true == NON_FAILED, y_pred == NON_FAILED
    return ConfusionCounts(
        tp=int(np.sum(pos_true & pos_pred)),
        fp=int(np.sum(~pos_true & pos_pred)),
        fn=int(np.sum(pos_true & ~pos_pred)),
        tn=int(np.sum(~pos_true & ~pos_pred)),
    )


def evaluate_predictions(y_true: Sequence[int], y_pred: Sequence[int]) -> MetricsRecord:
    return classification_metrics(confusion_counts(y_true, y_pred))


# =====================================================================
# Grid-search cross-validation
# =====================================================================

@dataclass(frozen=True)
class CvCell:
    C: float
    mean_accuracy: float
    fold_accuracies: Tuple[float, ...]
    converged: Tuple[bool, ...]


@dataclass(frozen=True)
class CvResult:
    grid: Tuple[CvCell, ...]
    best_C: float
    folds: int
    seed: int

    def to_frame(self) -> pd.DataFrame:
        records = []
        for cell in self.grid:
            for fold, (acc, ok) in enumerate(zip(cell.fold_accuracies, cell.converged)):
                records.append({
                    "C": cell.C,
                    "fold": fold,
                    "accuracy": acc,
                    "converged": ok,
                    "mean_accuracy": cell.mean_accuracy,
                })
        return pd.DataFrame(records, columns=["C", "fold", "accuracy", "converged", "mean_accuracy"])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "best_C": self.best_C,
            "folds": self.folds,
            "seed": self.seed,
            "grid": [
                {
                    "C": cell.C,
                    "mean_accuracy": cell.mean_accuracy,
                    "fold_accuracies": list(cell.fold_accuracies),
                    "converged": list(cell.converged),
                }
                for cell in self.grid
            ],
        }


def stratified_folds(y: np.ndarray, folds: int, seed: int) -> List[np.ndarray]:
    """Validation index sets; class members are dealt round-robin after a seeded shuffle."""
    if folds < 2:
        raise ParameterError(f"folds must be >= 2, got {folds}")
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    assignment = np.empty(y.size, dtype=int)
    for label in np.unique(y):
        members = np.flatnonzero(y == label)
        if members.size < folds:
            raise StratificationError(
                f"class {int(label):+d} has {members.size} member(s), fewer than {folds} folds"
            )
        assignment[rng.permutation(members)] = np.arange(members.size) % folds
    return [np.flatnonzero(assignment == k) for k in range(folds)]


def _dedupe_grid(C_grid: Sequence[float]) -> List[float]:
    values = [float(c) for c in C_grid]
    if not values:
        raise ParameterError("C grid is empty")
    bad = [c for c in values if not (math.isfinite(c) and c > 0)]
    if bad:
        raise ParameterError(f"C values must be finite and > 0, got {bad}")
    unique = sorted(set(values))
    if len(unique) < len(values):
        logger.warning("C grid holds duplicates; using %s", unique)
    return unique


def grid_search_cv(
    train: Dataset,
    spec: KernelSpec,
    C_grid: Sequence[float] = DEFAULT_C_GRID,
    folds: int = DEFAULT_FOLDS,
    seed: int = 0,
    tol: float = SMO_TOL,
    max_iter: Optional[int] = None,
    workers: int = 1,
) -> CvResult:
    """
    Stratified k-fold CV of validation accuracy per C. The Gram matrix of the
    whole training set is built once and sliced per fold. Best C has the
    highest mean accuracy, the smallest C on ties.
    """
    grid = _dedupe_grid(C_grid)
    X = train.scaled_features()
    y = train.y
    validation = stratified_folds(y, folds, seed)
    K = np.asarray(kernel_matrix(spec, X, workers=workers))
    everything = np.arange(y.size)

    def run_cell(task: Tuple[float, int]) -> Tuple[float, bool]:
        C, fold = task
        val = validation[fold]
        fit = np.setdiff1d(everything, val)
        solution, diagnostics = solve_dual(K[np.ix_(fit, fit)], y[fit], C, tol=tol, max_iter=max_iter)
        pred = labels_from_decision(solution.decision_from_gram(K[np.ix_(val, fit)]))
        if not diagnostics.converged:
            logger.warning("CV cell C=%g fold=%d did not converge", C, fold)
        return float(np.mean(pred == y[val])), diagnostics.converged

    tasks = [(C, fold) for C in grid for fold in range(folds)]
    outcomes = ordered_map(run_cell, tasks, workers)

    cells = []
    for k, C in enumerate(grid):
        chunk = outcomes[k * folds:(k + 1) * folds]
        accuracies = tuple(acc for acc, _ in chunk)
        cells.append(CvCell(
            C=C,
            mean_accuracy=float(np.mean(accuracies)),
            fold_accuracies=accuracies,
            converged=tuple(ok for _, ok in chunk),
        ))
        logger.debug("CV C=%g mean accuracy %.4f", C, cells[-1].mean_accuracy)

    best = cells[0]
    for cell in cells[1:]:
        if cell.mean_accuracy > best.mean_accuracy:
            best = cell
    logger.info("grid search: best C=%g (mean accuracy %.4f)", best.C, best.mean_accuracy)
    return CvResult(grid=tuple(cells), best_C=best.C, folds=folds, seed=seed)


# =====================================================================
# Learning curves
# =====================================================================

@dataclass(frozen=True)
class LearningPoint:
    fraction: float
    n_train: int
    metrics: MetricsRecord
    converged: bool
    iterations: int


@dataclass(frozen=True)
class LearningCurve:
    points: Tuple[LearningPoint, ...]
    test_size: int
    seed: int
    C: float
    kernel: str = ""

    def to_frame(self) -> pd.DataFrame:
        records = []
        for p in self.points:
            records.append({
                "fraction": p.fraction,
                "n_train": p.n_train,
                **p.metrics.to_dict(),
                "converged": p.converged,
                "iterations": p.iterations,
            })
        columns = ["fraction", "n_train", *METRIC_NAMES, "converged", "iterations"]
        return pd.DataFrame(records, columns=columns)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kernel": self.kernel,
            "C": self.C,
            "seed": self.seed,
            "test_size": self.test_size,
            "points": [
                {
                    "fraction": p.fraction,
                    "n_train": p.n_train,
                    "metrics": p.metrics.to_dict(),
                    "converged": p.converged,
                    "iterations": p.iterations,
                }
                for p in self.points
            ],
        }


def stratified_order(y: np.ndarray, seed: int) -> np.ndarray:
    """
    Interleaved ordering of the samples: within each class a seeded
    permutation, classes merged by relative rank. Every prefix is
    approximately stratified and prefixes are nested.
    """
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    keys = np.empty(y.size)
    classes = np.empty(y.size)
    for label in np.unique(y):
        members = rng.permutation(np.flatnonzero(y == label))
        keys[members] = (np.arange(members.size) + 0.5) / members.size
        classes[members] = label
    return np.lexsort((np.arange(y.size), classes, keys))


def subset_sizes(n: int, fractions: Sequence[float]) -> List[Tuple[float, int]]:
    pairs = []
    for f in sorted(set(float(f) for f in fractions)):
        if not (0.0 < f <= 1.0):
            raise ParameterError(f"fractions must lie in (0, 1], got {f}")
        size = int(math.floor(f * n + 1e-9))
        if pairs and size <= pairs[-1][1]:
            logger.warning("fraction %g gives %d sample(s) again; skipped", f, size)
            continue
        if size < 2:
            logger.warning("fraction %g gives %d sample(s); skipped", f, size)
            continue
        pairs.append((f, size))
    return pairs


def learning_curve(
    train: Dataset,
    test: Dataset,
    spec: KernelSpec,
    C: float,
    fractions: Sequence[float] = DEFAULT_FRACTIONS,
    seed: int = 0,
    tol: float = SMO_TOL,
    max_iter: Optional[int] = None,
    workers: int = 1,
    kernel_name: str = "",
) -> LearningCurve:
    """
    Fit on growing nested stratified subsets of `train` and score the five
    metrics on the fixed `test` set. Kernel blocks are built once and sliced.
    """
    if len(test) == 0:
        raise EmptyEvaluationError("test set is empty")
    X, y = train.scaled_features(), train.y
    X_test, y_test = test.scaled_features(), test.y
    order = stratified_order(y, seed)
    sizes = subset_sizes(y.size, fractions)

    K = np.asarray(kernel_matrix(spec, X, workers=workers))
    K_test = np.asarray(kernel_matrix(spec, X_test, X, workers=workers))

    def run_point(task: Tuple[float, int]) -> Optional[LearningPoint]:
        fraction, size = task
        idx = np.sort(order[:size])
        try:
            solution, diagnostics = solve_dual(K[np.ix_(idx, idx)], y[idx], C, tol=tol, max_iter=max_iter)
        except DegenerateLabelsError:
            logger.warning("learning curve: %d-sample subset holds one class; skipped", size)
            return None
        pred = labels_from_decision(solution.decision_from_gram(K_test[:, idx]))
        if not diagnostics.converged:
            logger.warning("learning curve point N=%d did not converge", size)
        return LearningPoint(
            fraction=fraction,
            n_train=size,
            metrics=evaluate_predictions(y_test, pred),
            converged=diagnostics.converged,
            iterations=diagnostics.iterations,
        )

    points = [p for p in ordered_map(run_point, sizes, workers) if p is not None]
    for p in points:
        logger.info("learning curve N=%d accuracy %.4f", p.n_train, p.metrics.accuracy)
    return LearningCurve(points=tuple(points), test_size=len(test), seed=seed, C=float(C), kernel=kernel_name)


def comparison_frame(curves: Mapping[str, LearningCurve]) -> pd.DataFrame:
    """Five metrics per N_train for every kernel, one row per (kernel, point)."""
    records = []
    for name in sorted(curves):
        for p in curves[name].points:
            records.append({"kernel": name, "n_train": p.n_train, **p.metrics.to_dict()})
    return pd.DataFrame(records, columns=["kernel", "n_train", *METRIC_NAMES])
