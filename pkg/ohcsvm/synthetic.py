# ---------------------------------------------------------------------
# ohcsvm/synthetic.py
# ---------------------------------------------------------------------
# Closed-form failure oracle used in place of finite-element data.
#
# A quadratic failure envelope q(eps) = eps^T A eps splits the strain
# hypercube: q <= 1 is non-failed. Stresses follow a linear orthotropic
# law softened by g(q) beyond the envelope, so the stiffness-degradation
# labeling recovers the envelope exactly.
# ---------------------------------------------------------------------

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ohcsvm.constants_config import (
    CLASSICAL_RANGE,
    FAILED,
    NON_FAILED,
    STRAIN_BOUND,
)
from ohcsvm.data_pipeline import (
    RAW_COLUMNS,
    Dataset,
    FeatureScaler,
    HomogenizedIncrement,
    LabeledSample,
    LoadPath,
    PlateGeometry,
)
from ohcsvm.errors import ParameterError, ShapeError

logger = logging.getLogger(__name__)

FAILURE_ENVELOPE = np.array([
    [8264.46, -3030.30, 0.0],
    [-3030.30, 12345.68, 0.0],
    [0.0, 0.0, 11080.33],
])
ELASTIC_MODULI = np.array([50000.0, 50000.0, 20000.0])   # E1, E2, G12 in MPa

SOFTENING_FACTOR = 0.8
BASELINE_FRACTION = 0.1


def envelope_value(eps: np.ndarray) -> np.ndarray:
    """q = eps^T A eps, row-wise for a (n, 3) array."""
    eps = np.asarray(eps, dtype=float)
    if eps.shape[-1] != 3:
        raise ShapeError(f"strain must have 3 components, got {eps.shape[-1]}")
    return np.einsum("...i,ij,...j->...", eps, FAILURE_ENVELOPE, eps)


def degradation(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.where(q <= 1.0, 1.0, SOFTENING_FACTOR * np.exp(-(q - 1.0)))


def oracle_label(eps: np.ndarray) -> np.ndarray:
    return np.where(envelope_value(eps) <= 1.0, NON_FAILED, FAILED)


def oracle_stress(eps: np.ndarray) -> np.ndarray:
    eps = np.asarray(eps, dtype=float)
    g = degradation(envelope_value(eps))
    return ELASTIC_MODULI * eps * np.asarray(g)[..., None]


def sample_strains(n: int, seed: int) -> np.ndarray:
    """Uniform samples of the strain hypercube, shape (n, 3)."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-STRAIN_BOUND, STRAIN_BOUND, size=(n, 3))


def radial_path(
    path_id: str, eps_end: np.ndarray, fractions: Sequence[float] = (BASELINE_FRACTION, 1.0)
) -> LoadPath:
    """Proportional path reaching eps_end; first increment is the elastic baseline."""
    eps_end = np.asarray(eps_end, dtype=float)
    increments = []
    for s in fractions:
        eps = s * eps_end
        increments.append(HomogenizedIncrement(eps=eps, sig=oracle_stress(eps)))
    return LoadPath(path_id=path_id, increments=increments)


def synth_oracle_dataset(
    n: int, seed: int, target: Tuple[float, float] = CLASSICAL_RANGE
) -> Dataset:
    """
    n uniform strain samples with closed-form labels. Each sample is the
    terminal increment of a two-increment radial path, kept in Dataset.paths.
    """
    if n < 4:
        raise ParameterError(f"need at least 4 synthetic samples, got {n}")

    strains = sample_strains(n, seed)
    labels = oracle_label(strains)
    q = envelope_value(strains)

    samples: List[LabeledSample] = []
    paths: List[LoadPath] = []
    for k, (eps, y) in enumerate(zip(strains, labels)):
        path_id = f"synth-{k:05d}"
        path = radial_path(path_id, eps)
        paths.append(path)
        samples.append(LabeledSample(
            eps=eps,
            y=int(y),
            path_id=path_id,
            increment=len(path) - 1,
            sig=path.increments[-1].sig,
            d_s=float(degradation(q[k])),
        ))

    n_failed = int(np.sum(labels == FAILED))
    logger.info("synthetic oracle: %d samples, %d failed, seed=%d", n, n_failed, seed)
    return Dataset(
        samples=samples,
        scaler=FeatureScaler(target=tuple(target)),
        split_seed=seed,
        paths=paths,
    )


def synth_load_paths_raw(
    paths: Sequence[LoadPath], geom: Optional[PlateGeometry] = None
) -> pd.DataFrame:
    """
    Displacements and reaction forces reproducing the paths' homogenized
    values. Shear displacement is split evenly over U3 and U4.
    """
    geom = geom or PlateGeometry()
    records = []
    for path in paths:
        n = len(path)
        for k, inc in enumerate(path.increments):
            e11, e22, g12 = inc.eps
            s11, s22, s12 = inc.sig
            u = [e11 * geom.d1, e22 * geom.d2, 0.5 * g12 * geom.d1, 0.5 * g12 * geom.d2]
            f = [
                s11 * geom.t * geom.d2,
                s22 * geom.t * geom.d1,
                s12 * geom.t * geom.d2,
                s12 * geom.t * geom.d1,
            ]
            records.append([path.path_id, k, (k + 1) / n, *u, *f])
    return pd.DataFrame(records, columns=RAW_COLUMNS)
