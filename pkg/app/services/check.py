# ---------------------------------------------------------------------
# app/services/check.py
# ---------------------------------------------------------------------
# Service Layer for the Environment Check function
# ---------------------------------------------------------------------

import logging
import os
import platform
from datetime import datetime
from pathlib import Path
from typing import Optional

import numpy as np
import psutil

from app.services.scoring import model_status
from ohcsvm import __version__
from ohcsvm.constants_config import MAGENTA, RESET

logger = logging.getLogger(__name__)


def uptime() -> str:
    """Host uptime formatted as "Days, HH:MM:SS"."""
    boot_time = datetime.fromtimestamp(psutil.boot_time())
    return str(datetime.now() - boot_time).split(".")[0]


def get_runtime_values(model_path: Optional[Path]) -> dict[str, object]:
    """
    Returns runtime facts for the /check route:
    - Interpreter, numpy and package versions
    - Host CPU / memory load
    - Configured model and whether it loads
    """
    logger.debug(f"{MAGENTA}Starting get_runtime_values() function.{RESET}")

    memory = psutil.virtual_memory()
    results: dict[str, object] = {
        "status": "Operational",
        "platform": platform.system(),
        "architecture": platform.machine(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "ohcsvm": __version__,
        "uptime": uptime(),
        "cpu_count": psutil.cpu_count(logical=True),
        "cpu_usage": f"{psutil.cpu_percent()}%",
        "memory_usage": f"{memory.percent}%",
        "memory_total_gb": memory.total // (2**30),
        "working_dir": os.getcwd(),
    }
    results.update(model_status(model_path))

    logger.debug(f"{MAGENTA}Returning results dictionary.{RESET}")
    return results
