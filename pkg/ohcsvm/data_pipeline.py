# ---------------------------------------------------------------------
# ohcsvm/data_pipeline.py
# ---------------------------------------------------------------------
# Load-path ingestion, homogenization, stiffness-degradation labeling,
# feature scaling and stratified splitting.
#
# Sign convention for labels: +1 non-failed, -1 failed.
# ---------------------------------------------------------------------

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ohcsvm.constants_config import (
    CLASSICAL_RANGE,
    DEFAULT_TEST_FRACTION,
    DEFAULT_THRESHOLD,
    EPS_DIV,
    FAILED,
    FLOAT_FORMAT,
    HOLE_DIAMETER,
    NON_FAILED,
    PLATE_D1,
    PLATE_D2,
    PLATE_T,
    STRAIN_RANGE,
)
from ohcsvm.errors import (
    DegeneratePathError,
    EmptyDatasetError,
    InvalidRecordError,
    ParameterError,
    ParseError,
    ShapeError,
    ShearSingularityError,
    StratificationError,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

HOMOGENIZED_COLUMNS = [
    "path_id", "increment", "eps11", "eps22", "gam12", "sig11", "sig22", "sig12",
]
RAW_COLUMNS = [
    "path_id", "increment", "time", "U1", "U2", "U3", "U4", "F1", "F2", "F3", "F4",
]
STRAIN_COLUMNS = ["eps11", "eps22", "gam12"]
STRESS_COLUMNS = ["sig11", "sig22", "sig12"]
DATASET_COLUMNS = HOMOGENIZED_COLUMNS + ["d_s", "label", "split"]


# =====================================================================
# Domain types
# =====================================================================

@dataclass(frozen=True)
class PlateGeometry:
    """Open-hole plate dimensions in mm."""

    d1: float = PLATE_D1
    d2: float = PLATE_D2
    t: float = PLATE_T
    hole_diameter: float = HOLE_DIAMETER

    def __post_init__(self) -> None:
        for name in ("d1", "d2", "t", "hole_diameter"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"geometry {name} must be finite and > 0, got {value}")


@dataclass(frozen=True)
class RawIncrement:
    u: np.ndarray       # [U1, U2, U3, U4] mm
    f: np.ndarray       # [F1, F2, F3, F4] N
    time: float


@dataclass(frozen=True)
class HomogenizedIncrement:
    eps: np.ndarray     # [eps11, eps22, gam12]
    sig: np.ndarray     # [sig11, sig22, sig12] MPa

    def __post_init__(self) -> None:
        eps = np.asarray(self.eps, dtype=float).reshape(-1)
        sig = np.asarray(self.sig, dtype=float).reshape(-1)
        if eps.shape != (3,) or sig.shape != (3,):
            raise ShapeError("strain and stress must be 3-vectors")
        if not (np.all(np.isfinite(eps)) and np.all(np.isfinite(sig))):
            raise InvalidRecordError("homogenized increment holds non-finite values")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "sig", sig)


@dataclass(frozen=True)
class LoadPath:
    """
    One radial loading path. `baseline_window` is a half-open index range
    (start, stop) over which the linear-elastic reference stiffness is
    averaged; None selects it automatically (see stiffness_history).
    """

    path_id: str
    increments: Tuple[HomogenizedIncrement, ...]
    baseline_window: Optional[Tuple[int, int]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "increments", tuple(self.increments))
        if len(self.increments) < 2:
            raise ParameterError(
                f"load path {self.path_id!r} needs at least 2 increments, "
                f"got {len(self.increments)}"
            )

    @property
    def strains(self) -> np.ndarray:
        return np.vstack([inc.eps for inc in self.increments])

    @property
    def stresses(self) -> np.ndarray:
        return np.vstack([inc.sig for inc in self.increments])

    def __len__(self) -> int:
        return len(self.increments)


@dataclass(frozen=True)
class StiffnessState:
    """Secant stiffnesses (NaN where the strain component is excluded) and dS."""

    e1: float
    e2: float
    g12: float
    d_s: float


@dataclass(frozen=True)
class LabeledSample:
    eps: np.ndarray
    y: int
    path_id: Optional[str] = None
    increment: Optional[int] = None
    sig: Optional[np.ndarray] = None
    d_s: Optional[float] = None

    def __post_init__(self) -> None:
        if self.y not in (FAILED, NON_FAILED):
            raise ParameterError(f"label must be -1 or +1, got {self.y}")
        object.__setattr__(self, "eps", np.asarray(self.eps, dtype=float).reshape(-1))


@dataclass(frozen=True)
class FeatureScaler:
    """Per-feature affine map from `source` onto `target`, identical for all features."""

    target: Tuple[float, float] = CLASSICAL_RANGE
    source: Tuple[float, float] = STRAIN_RANGE

    def __post_init__(self) -> None:
        lo, hi = (float(v) for v in self.target)
        s_lo, s_hi = (float(v) for v in self.source)
        if not all(math.isfinite(v) for v in (lo, hi, s_lo, s_hi)):
            raise ParameterError("scaler bounds must be finite")
        if lo == hi or s_lo == s_hi:
            raise ParameterError(f"degenerate scaling interval {self.source} -> {self.target}")
        object.__setattr__(self, "target", (lo, hi))
        object.__setattr__(self, "source", (s_lo, s_hi))

    @property
    def slope(self) -> float:
        return (self.target[1] - self.target[0]) / (self.source[1] - self.source[0])

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.target[0] + (x - self.source[0]) * self.slope

    def inverse_transform(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return self.source[0] + (z - self.target[0]) / self.slope

    def to_dict(self) -> Dict[str, List[float]]:
        return {"source": list(self.source), "target": list(self.target)}

    @classmethod
    def from_dict(cls, data: Dict[str, Sequence[float]]) -> "FeatureScaler":
        return cls(target=tuple(data["target"]), source=tuple(data["source"]))

    @property
    def fingerprint(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha1(payload).hexdigest()[:12]


@dataclass(frozen=True)
class Dataset:
    samples: Tuple[LabeledSample, ...]
    scaler: FeatureScaler = field(default_factory=FeatureScaler)
    split_seed: int = 0
    paths: Tuple[LoadPath, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "paths", tuple(self.paths))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def class_counts(self) -> Tuple[int, int]:
        """(number of failed, number of non-failed) samples."""
        y = self.y
        return int(np.sum(y == FAILED)), int(np.sum(y == NON_FAILED))

    @property
    def X(self) -> np.ndarray:
        if not self.samples:
            return np.empty((0, 3))
        return np.vstack([s.eps for s in self.samples])

    @property
    def y(self) -> np.ndarray:
        return np.array([s.y for s in self.samples], dtype=int)

    def scaled_features(self) -> np.ndarray:
        return self.scaler.transform(self.X)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return replace(self, samples=tuple(self.samples[int(i)] for i in indices))

    def with_scaler(self, scaler: FeatureScaler) -> "Dataset":
        return replace(self, scaler=scaler)


# =====================================================================
# Homogenization
# =====================================================================

def _as_vector(values: Sequence[float], size: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.shape != (size,):
        raise ShapeError(f"{name} must have {size} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidRecordError(f"{name} holds non-finite values: {arr.tolist()}")
    return arr


def homogenize_strains(u: Sequence[float], geom: PlateGeometry) -> np.ndarray:
    """Reference-DOF displacements [U1..U4] (mm) -> [eps11, eps22, gam12]."""
    u = _as_vector(u, 4, "U")
    return np.array([
        u[0] / geom.d1,
        u[1] / geom.d2,
        u[2] / geom.d1 + u[3] / geom.d2,
    ])


def homogenize_stresses(
    f: Sequence[float],
    u: Sequence[float],
    gamma12: float,
    geom: PlateGeometry,
    eps_div: float = EPS_DIV,
) -> np.ndarray:
    """
    Reaction forces [F1..F4] (N) -> [sig11, sig22, sig12] (MPa) via energy balance.

    The shear term divides by gamma12. When |gamma12| <= eps_div it is 0 if the
    shear DOFs are all unloaded, otherwise ShearSingularityError is raised.
    """
    f = _as_vector(f, 4, "F")
    u = _as_vector(u, 4, "U")
    if not math.isfinite(gamma12):
        raise InvalidRecordError(f"gamma12 is not finite: {gamma12}")

    sig11 = f[0] / (geom.t * geom.d2)
    sig22 = f[1] / (geom.t * geom.d1)

    if abs(gamma12) <= eps_div:
        if f[2] == 0 and u[2] == 0 and f[3] == 0 and u[3] == 0:
            sig12 = 0.0
        else:
            raise ShearSingularityError(
                f"|gamma12|={abs(gamma12):.3e} <= {eps_div:.1e} with loaded shear DOFs"
            )
    else:
        sig12 = (f[2] * u[2] + f[3] * u[3]) / (gamma12 * geom.t * geom.d1 * geom.d2)

    return np.array([sig11, sig22, sig12])


def homogenize_increment(
    raw: RawIncrement, geom: PlateGeometry, eps_div: float = EPS_DIV
) -> HomogenizedIncrement:
    eps = homogenize_strains(raw.u, geom)
    try:
        sig = homogenize_stresses(raw.f, raw.u, eps[2], geom, eps_div)
    except ShearSingularityError as exc:
        logger.warning("sig12 set to 0 at t=%s: %s", raw.time, exc)
        f = _as_vector(raw.f, 4, "F")
        sig = np.array([f[0] / (geom.t * geom.d2), f[1] / (geom.t * geom.d1), 0.0])
    return HomogenizedIncrement(eps=eps, sig=sig)


# =====================================================================
# Stiffness degradation and labeling
# =====================================================================

def _auto_baseline(active: np.ndarray) -> Tuple[int, int]:
    ever_active = active.any(axis=0)
    counts = active[:, ever_active].sum(axis=1)
    full = np.flatnonzero(counts == ever_active.sum())
    # Components may switch on at different increments on non-radial paths;
    # fall back to the first increment with the most active components.
    start = int(full[0]) if full.size else int(np.argmax(counts))
    return start, start + 1


def stiffness_history(path: LoadPath, eps_div: float = EPS_DIV) -> List[StiffnessState]:
    """
    Secant stiffness E1, E2, G12 per increment and the degradation ratio dS.

    dS is the minimum of E(t)/E(0) over the components whose strain exceeds
    eps_div both at t and throughout the baseline window; E(0) is the mean
    secant over that window. Increments with no retained component get dS = 1.
    Shear stiffness uses the engineering shear strain gam12.
    """
    strains = path.strains
    stresses = path.stresses
    n = len(path)

    active = np.abs(strains) > eps_div
    if not active.any():
        raise DegeneratePathError(
            f"load path {path.path_id!r}: no strain component exceeds {eps_div:.1e}"
        )

    if path.baseline_window is None:
        start, stop = _auto_baseline(active)
    else:
        start, stop = path.baseline_window
        if not (0 <= start < stop <= n):
            raise ParameterError(
                f"load path {path.path_id!r}: baseline window {path.baseline_window} "
                f"outside 0..{n}"
            )

    secant = np.full_like(strains, np.nan)
    np.divide(stresses, strains, out=secant, where=active)

    base_active = active[start:stop].all(axis=0)
    if not base_active.any():
        raise DegeneratePathError(
            f"load path {path.path_id!r}: no strain component exceeds "
            f"{eps_div:.1e} in the baseline window {start}:{stop}"
        )
    reference = np.full(3, np.nan)
    reference[base_active] = secant[start:stop, base_active].mean(axis=0)
    base_active &= np.abs(np.nan_to_num(reference)) > 0

    states = []
    for t in range(n):
        retained = active[t] & base_active
        if retained.any():
            d_s = float(np.min(secant[t, retained] / reference[retained]))
        else:
            d_s = 1.0
        e1, e2, g12 = (float(v) for v in secant[t])
        states.append(StiffnessState(e1=e1, e2=e2, g12=g12, d_s=d_s))
    return states


def label_samples(
    paths: Sequence[LoadPath],
    threshold: float = DEFAULT_THRESHOLD,
    eps_div: float = EPS_DIV,
    terminal_only: bool = False,
) -> List[LabeledSample]:
    """
    Label every increment: y = -1 when dS < threshold, +1 otherwise.

    `terminal_only` keeps only the last increment of each path. The label
    stage sets it for the in-process synthetic block, whose 0.1*eps first
    increment is a baseline anchor, so n generated paths give n samples.
    File inputs are always labeled at every increment.
    """
    if not (0.0 < threshold < 1.0):
        raise ParameterError(f"threshold must lie in (0, 1), got {threshold}")

    samples = []
    for path in paths:
        states = stiffness_history(path, eps_div)
        indices = [len(path) - 1] if terminal_only else range(len(path))
        for t in indices:
            inc, state = path.increments[t], states[t]
            samples.append(LabeledSample(
                eps=inc.eps,
                y=FAILED if state.d_s < threshold else NON_FAILED,
                path_id=path.path_id,
                increment=t,
                sig=inc.sig,
                d_s=state.d_s,
            ))
    return samples


# =====================================================================
# CSV ingestion and export
# =====================================================================

def _read_table(file: PathLike) -> pd.DataFrame:
    try:
        frame = pd.read_csv(file, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise EmptyDatasetError(f"{file}: file is empty")
    if frame.empty:
        raise EmptyDatasetError(f"{file}: no data rows")
    return frame


def _check_header(frame: pd.DataFrame, file: PathLike) -> str:
    columns = [c.strip() for c in frame.columns]
    if columns == HOMOGENIZED_COLUMNS:
        return "homogenized"
    if columns == RAW_COLUMNS:
        return "raw"
    expected = RAW_COLUMNS if "U1" in columns else HOMOGENIZED_COLUMNS
    missing = [c for c in expected if c not in columns]
    extra = [c for c in columns if c not in expected]
    details = []
    if missing:
        details.append(f"missing column(s) {missing}")
    if extra:
        details.append(f"unexpected column(s) {extra}")
    if not details:
        details.append(f"column order must be {expected}")
    raise ParseError(f"{file}: bad header, " + "; ".join(details))


def _numeric_block(frame: pd.DataFrame, columns: Sequence[str]) -> np.ndarray:
    block = np.empty((len(frame), len(columns)))
    for k, column in enumerate(columns):
        raw = frame[column].str.strip()
        values = pd.to_numeric(raw, errors="coerce").to_numpy(dtype=float)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            row = int(bad[0])
            raise ParseError(
                f"non-numeric value {frame[column].iloc[row]!r} in column {column}",
                row=row + 1,
            )
        block[:, k] = values
    return block


def _group_rows(frame: pd.DataFrame, increments: np.ndarray) -> Dict[str, List[int]]:
    groups: Dict[str, List[int]] = {}
    for row, (path_id, inc) in enumerate(zip(frame["path_id"].str.strip(), increments)):
        if not path_id:
            raise ParseError("empty path_id", row=row + 1)
        if inc != int(inc):
            raise ParseError(f"increment {inc} is not an integer", row=row + 1)
        rows = groups.setdefault(path_id, [])
        if rows and inc <= increments[rows[-1]]:
            raise ParseError(
                f"increment {int(inc)} of path {path_id!r} does not increase "
                f"(previous {int(increments[rows[-1]])})",
                row=row + 1,
            )
        rows.append(row)
    return groups


def _build_paths(
    frame: pd.DataFrame, schema: str, geometry: Optional[PlateGeometry], eps_div: float
) -> List[LoadPath]:
    increments = _numeric_block(frame, ["increment"])[:, 0]
    groups = _group_rows(frame, increments)

    if schema == "homogenized":
        strains = _numeric_block(frame, STRAIN_COLUMNS)
        stresses = _numeric_block(frame, STRESS_COLUMNS)
        build = lambda row: HomogenizedIncrement(eps=strains[row], sig=stresses[row])
    else:
        geom = geometry or PlateGeometry()
        times = _numeric_block(frame, ["time"])[:, 0]
        disp = _numeric_block(frame, ["U1", "U2", "U3", "U4"])
        forces = _numeric_block(frame, ["F1", "F2", "F3", "F4"])
        for rows in groups.values():
            for prev, row in zip(rows, rows[1:]):
                if times[row] <= times[prev]:
                    raise ParseError(f"time {times[row]} does not increase", row=row + 1)
        build = lambda row: homogenize_increment(
            RawIncrement(u=disp[row], f=forces[row], time=float(times[row])), geom, eps_div
        )

    paths = []
    for path_id, rows in groups.items():
        try:
            paths.append(LoadPath(path_id=path_id, increments=[build(r) for r in rows]))
        except (ParameterError, InvalidRecordError) as exc:
            raise ParseError(str(exc), row=rows[0] + 1)
    return paths


def paths_from_raw(
    rows: pd.DataFrame,
    geom: Optional[PlateGeometry] = None,
    eps_div: float = EPS_DIV,
) -> List[LoadPath]:
    """LoadPaths from an in-memory table in the raw (U, F) schema."""
    frame = rows.astype(str)
    missing = [c for c in RAW_COLUMNS if c not in frame.columns]
    if missing:
        raise ParseError(f"raw records lack column(s) {missing}")
    return _build_paths(frame[RAW_COLUMNS], "raw", geom, eps_div)


def ingest_paths(
    file: PathLike,
    geometry: Optional[PlateGeometry] = None,
    eps_div: float = EPS_DIV,
    schema: str = "auto",
) -> List[LoadPath]:
    """
    Read load paths from a homogenized or raw CSV. The schema is detected
    from the header; a `schema` other than "auto" must match it.

    Rows are grouped by path_id in order of first appearance; increments must
    increase strictly within a path. Raw rows are homogenized with `geometry`.
    """
    frame = _read_table(file)
    frame.columns = [c.strip() for c in frame.columns]
    found = _check_header(frame, file)
    if schema not in ("auto", found):
        raise ParseError(f"{file}: expected the {schema} schema, header is {found}")
    schema = found
    paths = _build_paths(frame, schema, geometry, eps_div)
    logger.info("ingested %d load path(s) (%s schema) from %s", len(paths), schema, file)
    return paths


def paths_to_frame(paths: Sequence[LoadPath]) -> pd.DataFrame:
    records = []
    for path in paths:
        for k, inc in enumerate(path.increments):
            records.append([path.path_id, k, *inc.eps, *inc.sig])
    return pd.DataFrame(records, columns=HOMOGENIZED_COLUMNS)


def export_paths(paths: Sequence[LoadPath], file: PathLike) -> Path:
    """Write paths in the homogenized CSV schema (round-trip exact floats)."""
    file = Path(file)
    file.parent.mkdir(parents=True, exist_ok=True)
    paths_to_frame(paths).to_csv(
        file, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    return file


def dataset_to_frame(
    ds: Dataset, split: Optional[Sequence[str]] = None
) -> pd.DataFrame:
    records = []
    for k, s in enumerate(ds.samples):
        sig = s.sig if s.sig is not None else np.full(3, np.nan)
        records.append([
            s.path_id if s.path_id is not None else f"sample-{k}",
            s.increment if s.increment is not None else 0,
            *s.eps, *sig,
            s.d_s if s.d_s is not None else np.nan,
            s.y,
            split[k] if split is not None else "",
        ])
    return pd.DataFrame(records, columns=DATASET_COLUMNS)


def export_dataset(
    ds: Dataset, file: PathLike, split: Optional[Sequence[str]] = None
) -> Path:
    """Homogenized CSV schema plus `d_s`, `label` and `split` columns."""
    file = Path(file)
    file.parent.mkdir(parents=True, exist_ok=True)
    dataset_to_frame(ds, split).to_csv(
        file, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    return file


def read_dataset(file: PathLike) -> Tuple[List[LabeledSample], List[str]]:
    """Inverse of export_dataset: labeled samples and their split tags."""
    frame = pd.read_csv(file, keep_default_na=True, dtype={"path_id": str, "split": str})
    missing = [c for c in DATASET_COLUMNS if c not in frame.columns]
    if missing:
        raise ParseError(f"{file}: missing column(s) {missing}")
    samples = []
    for row in frame.itertuples(index=False):
        sig = np.array([row.sig11, row.sig22, row.sig12], dtype=float)
        samples.append(LabeledSample(
            eps=np.array([row.eps11, row.eps22, row.gam12], dtype=float),
            y=int(row.label),
            path_id=str(row.path_id),
            increment=int(row.increment),
            sig=None if np.isnan(sig).all() else sig,
            d_s=None if pd.isna(row.d_s) else float(row.d_s),
        ))
    splits = frame["split"].fillna("").astype(str).tolist()
    return samples, splits


# =====================================================================
# Scaling and splitting
# =====================================================================

def scale_features(
    samples: Union[Sequence[LabeledSample], np.ndarray],
    target: Tuple[float, float] = CLASSICAL_RANGE,
) -> Tuple[np.ndarray, FeatureScaler]:
    """
    Map strains from the sampling hypercube onto `target`. The map is fixed by
    the hypercube bounds, not by the data, so subsets scale identically.
    """
    scaler = FeatureScaler(target=tuple(target))
    if isinstance(samples, np.ndarray):
        X = samples
    else:
        X = np.vstack([s.eps for s in samples]) if len(samples) else np.empty((0, 3))
    return scaler.transform(X), scaler


def _allocate(counts: Sequence[int], fraction: float, total: int) -> List[int]:
    # Largest-remainder rounding: floor per class, top up to `total`.
    exact = [fraction * c for c in counts]
    alloc = [int(math.floor(e + 1e-9)) for e in exact]
    order = sorted(range(len(counts)), key=lambda k: (-(exact[k] - alloc[k]), k))
    for k in order[: max(0, total - sum(alloc))]:
        alloc[k] += 1
    return alloc


def stratified_split_indices(
    y: np.ndarray, test_fraction: float, seed: int
) -> Tuple[np.ndarray, np.ndarray]:
    if not (0.0 < test_fraction < 1.0):
        raise ParameterError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    y = np.asarray(y)
    classes = np.unique(y)
    members = [np.flatnonzero(y == c) for c in classes]
    for c, idx in zip(classes, members):
        if idx.size < 2:
            raise StratificationError(f"class {c:+d} has {idx.size} member(s); need >= 2")

    total = int(math.floor(test_fraction * y.size + 0.5))
    n_test = _allocate([idx.size for idx in members], test_fraction, total)

    rng = np.random.default_rng(seed)
    train, test = [], []
    for idx, k in zip(members, n_test):
        k = min(max(k, 1), idx.size - 1)
        perm = rng.permutation(idx)
        test.append(perm[:k])
        train.append(perm[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split_dataset(
    ds: Dataset, test_fraction: float = DEFAULT_TEST_FRACTION, seed: int = 0
) -> Tuple[Dataset, Dataset]:
    """Stratified, seed-deterministic train/test partition."""
    train_idx, test_idx = stratified_split_indices(ds.y, test_fraction, seed)
    logger.debug("split %d samples into %d train / %d test", len(ds), train_idx.size, test_idx.size)
    return (
        replace(ds.subset(train_idx), split_seed=seed),
        replace(ds.subset(test_idx), split_seed=seed),
    )
