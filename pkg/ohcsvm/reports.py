# ---------------------------------------------------------------------
# ohcsvm/reports.py
# ---------------------------------------------------------------------
# CSV and JSON writers shared by every stage.
#
# Floats are written round-trip exact and JSON keys sorted so that a
# rerun with the same config reproduces each file byte for byte.
# ---------------------------------------------------------------------

import json
import logging
from pathlib import Path
from typing import Any, Union

import numpy as np
import pandas as pd

from ohcsvm.constants_config import FLOAT_FORMAT

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _plain(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return value.as_posix()
    raise TypeError(f"{type(value).__name__} is not JSON serialisable")


def write_json(data: Any, file: PathLike) -> Path:
    file = Path(file)
    file.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(data, indent=2, sort_keys=True, default=_plain)
    file.write_text(text + "\n", encoding="utf-8")
    logger.debug("wrote %s", file)
    return file


def read_json(file: PathLike) -> Any:
    return json.loads(Path(file).read_text(encoding="utf-8"))


def write_frame(frame: pd.DataFrame, file: PathLike) -> Path:
    file = Path(file)
    file.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(file, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("wrote %s (%d row(s))", file, len(frame))
    return file


def write_gram_csv(K: np.ndarray, file: PathLike) -> Path:
    """Dense kernel matrix, one row per sample, for debugging."""
    K = np.asarray(K, dtype=float)
    frame = pd.DataFrame(K, columns=[f"k{j}" for j in range(K.shape[1])])
    return write_frame(frame, file)
