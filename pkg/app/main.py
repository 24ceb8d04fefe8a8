# ---------------------------------------------------------------------------
# main.py
# ---------------------------------------------------------------------------
# Starting point for the ohc-qsvm FastAPI scoring service. It serves a
# trained model document (models/<name>.json of a pipeline run) and never
# runs pipeline stages itself.
#
# Dependencies:
# pip install fastapi "uvicorn[standard]" pydantic-settings python-dotenv
#
# Terminal command to start uvicorn:
# OHCSVM_MODEL_PATH=output/synthetic/run/models/rbf.json \
#   uvicorn app.main:app --host 0.0.0.0 --port 8010 --reload
#
# Access via: localhost:8010
# Stop server: CTRL + C
# ---------------------------------------------------------------------------

import logging

from fastapi import FastAPI

from ohcsvm import __version__
from ohcsvm.constants_config import APP_NAME
from ohcsvm.settings import configure_logging, get_settings

# Routers
from app.routers import check, scoring

# -----------------------------------------------------------------
# Configure Python Logging
# -----------------------------------------------------------------
# Level comes from OHCSVM_LOG_LEVEL (default INFO).
# Application loggers (e.g., in services, routes) inherit this level.
# -----------------------------------------------------------------

configure_logging(get_settings().log_level.upper())
logger = logging.getLogger(__name__)

# Initialize FastAPI app
app = FastAPI(title=APP_NAME, version=__version__)

# Register all routers
app.include_router(check.router, tags=["check"])
app.include_router(scoring.router, tags=["scoring"])


@app.get("/")
async def root():
    return {
        "app": APP_NAME,
        "routes": ["/health", "/check", "/score"],
    }


@app.get("/health")
async def health_check():
    return {"status": "healthy", "app": APP_NAME}
