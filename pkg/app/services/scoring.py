# ---------------------------------------------------------------------
# app/services/scoring.py
# ---------------------------------------------------------------------
# Service layer for the scoring route: model loading and inference
# ---------------------------------------------------------------------

import logging
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from ohcsvm.constants_config import MAGENTA, RESET
from ohcsvm.errors import OhcSvmError
from ohcsvm.kernels import kernel_kind
from ohcsvm.svm_solver import SvmModel, decision_values, labels_from_decision, load_model

logger = logging.getLogger(__name__)


class ModelUnavailableError(OhcSvmError):
    """No model path configured, or the model document cannot be loaded."""


@lru_cache(maxsize=4)
def _cached_model(path: str, mtime_ns: int) -> SvmModel:
    # mtime_ns is part of the key so a rewritten model file is reloaded
    logger.info(f"{MAGENTA}Loading model document {path}.{RESET}")
    return load_model(path)


def get_model(model_path: Optional[Path]) -> SvmModel:
    """
    Returns the model stored at `model_path`.

    Raises:
        ModelUnavailableError: when no path is configured or the file is
            missing or malformed.
    """
    if model_path is None:
        raise ModelUnavailableError("no model configured (set OHCSVM_MODEL_PATH)")
    path = Path(model_path)
    if not path.is_file():
        raise ModelUnavailableError(f"model file {path} does not exist")
    try:
        return _cached_model(str(path.resolve()), path.stat().st_mtime_ns)
    except (OhcSvmError, KeyError, TypeError, ValueError) as exc:
        logger.exception("Model document %s could not be loaded", path)
        raise ModelUnavailableError(f"model file {path} could not be loaded: {exc}") from exc


def model_status(model_path: Optional[Path]) -> Dict[str, object]:
    """Short description of the configured model for the /check route."""
    status: Dict[str, object] = {"model_path": str(model_path) if model_path else None}
    try:
        model = get_model(model_path)
    except ModelUnavailableError as exc:
        status.update(model_loaded=False, model_error=str(exc))
        return status
    status.update(
        model_loaded=True,
        model_error="",
        kernel=kernel_kind(model.kernel),
        support_vectors=int(model.support_indices.size),
        C=model.C,
    )
    return status


def score_strains(model: SvmModel, strains: List[List[float]]) -> Dict[str, object]:
    """
    Decision values and labels for raw strain triples. The model's scaler,
    when it has one, maps the strains into its training feature range.
    """
    X = np.asarray(strains, dtype=float)
    if model.scaler is not None:
        X = model.scaler.transform(X)
    f = decision_values(model, X)
    labels = labels_from_decision(f)
    logger.debug(f"{MAGENTA}Scored {X.shape[0]} strain vector(s).{RESET}")
    return {
        "kernel": kernel_kind(model.kernel),
        "decision": [float(v) for v in f],
        "labels": [int(v) for v in labels],
    }
