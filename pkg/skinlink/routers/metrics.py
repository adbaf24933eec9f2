from fastapi import APIRouter, Depends, HTTPException, Request
from pydantic import BaseModel, Field
from typing import List, Optional

from skinlink.config import settings
from skinlink.exceptions import LinkModelError
from skinlink.models import (
    JitterReport,
    McConfig,
    MetricsReport,
    RunConfig,
    SweepAxis,
    SweepRow,
    ValidationReport,
)
from skinlink.services import LinkEvaluationService

router = APIRouter(prefix="/metrics", tags=["metrics"])


class JitterRequest(BaseModel):
    config: RunConfig = Field(default_factory=RunConfig)
    target_outage: float = Field(gt=0, lt=1)


class SweepRequest(BaseModel):
    config: RunConfig = Field(default_factory=RunConfig)
    axes: List[SweepAxis] = Field(min_length=1, max_length=2)


class ValidateRequest(BaseModel):
    config: RunConfig = Field(default_factory=RunConfig)
    mc: Optional[McConfig] = None
    sigma_limit: float = Field(3.0, gt=0)


def get_service(request: Request) -> LinkEvaluationService:
    return LinkEvaluationService(table=getattr(request.app.state, "attenuation_table", None))


@router.post("/eval", response_model=MetricsReport)
def evaluate(
    config: RunConfig,
    service: LinkEvaluationService = Depends(get_service),
):
    try:
        return service.evaluate(config)
    except LinkModelError as e:
        raise HTTPException(status_code=422, detail=str(e))


@router.post("/jitter", response_model=JitterReport)
def jitter(
    request: JitterRequest,
    service: LinkEvaluationService = Depends(get_service),
):
    try:
        return service.jitter(request.config, request.target_outage)
    except LinkModelError as e:
        raise HTTPException(status_code=422, detail=str(e))


@router.post("/sweep", response_model=List[SweepRow])
def sweep(
    request: SweepRequest,
    service: LinkEvaluationService = Depends(get_service),
):
    points = 1
    for axis in request.axes:
        points *= axis.count
    if points > settings.api_max_sweep_points:
        raise HTTPException(
            status_code=400,
            detail=f"Sweep has {points} points; the limit is {settings.api_max_sweep_points}",
        )
    try:
        return service.sweep(request.config, request.axes)
    except LinkModelError as e:
        raise HTTPException(status_code=422, detail=str(e))


@router.post("/validate", response_model=ValidationReport)
def validate(
    request: ValidateRequest,
    service: LinkEvaluationService = Depends(get_service),
):
    mc = request.mc or McConfig(
        n_samples=settings.mc_samples,
        seed=settings.mc_seed,
        n_streams=settings.mc_streams,
        block_size=settings.mc_block_size,
    )
    if mc.n_samples > settings.api_max_mc_samples:
        raise HTTPException(
            status_code=400,
            detail=f"n_samples={mc.n_samples} exceeds the limit of {settings.api_max_mc_samples}",
        )
    try:
        return service.validate(request.config, mc, sigma_limit=request.sigma_limit)
    except LinkModelError as e:
        raise HTTPException(status_code=422, detail=str(e))
