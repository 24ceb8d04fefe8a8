# -----------------------------------------------------------------
# app/routers/check.py
# -----------------------------------------------------------------
# Environment check route
# -----------------------------------------------------------------

import logging

from fastapi import APIRouter, Depends

from app.services.check import get_runtime_values
from ohcsvm.constants_config import MAGENTA, RESET
from ohcsvm.settings import Settings, get_settings

logger = logging.getLogger(__name__)

# Create router instance
router = APIRouter(tags=["Env Check"])


@router.get("/check")
async def env_check(settings: Settings = Depends(get_settings)) -> dict:
    logger.info(f"{MAGENTA}Collecting runtime values.{RESET}")
    context = get_runtime_values(settings.model_path)

    logger.info(f"{MAGENTA}The Python version is {context['python']}.{RESET}")
    logger.info(f"{MAGENTA}Model loaded: {context['model_loaded']}.{RESET}")
    return context
