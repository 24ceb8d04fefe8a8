# -----------------------------------------------------------------
# app/routers/scoring.py
# -----------------------------------------------------------------
# Failure classification of raw strain vectors
# -----------------------------------------------------------------

import logging
import math
from typing import List, Tuple

from fastapi import APIRouter, Depends, HTTPException
from pydantic import BaseModel, Field, field_validator

from app.services.scoring import ModelUnavailableError, get_model, score_strains
from ohcsvm.errors import ShapeError
from ohcsvm.settings import Settings, get_settings

logger = logging.getLogger(__name__)

router = APIRouter(tags=["Scoring"])


class ScoreRequest(BaseModel):
    strains: List[Tuple[float, float, float]] = Field(min_length=1)

    @field_validator("strains")
    @classmethod
    def _finite(cls, value: List[Tuple[float, float, float]]) -> List[Tuple[float, float, float]]:
        for i, row in enumerate(value):
            if not all(math.isfinite(v) for v in row):
                raise ValueError(f"strain vector {i} has a non-finite component")
        return value


class ScoreResponse(BaseModel):
    kernel: str
    decision: List[float]
    labels: List[int]


@router.post("/score", response_model=ScoreResponse)
async def score(request: ScoreRequest, settings: Settings = Depends(get_settings)) -> dict:
    try:
        model = get_model(settings.model_path)
    except ModelUnavailableError as exc:
        raise HTTPException(status_code=503, detail=str(exc))

    try:
        return score_strains(model, [list(row) for row in request.strains])
    except ShapeError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
