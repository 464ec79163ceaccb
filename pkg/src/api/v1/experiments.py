from fastapi import APIRouter, Depends, HTTPException, status
from pydantic import BaseModel

from ...core.config import ExperimentConfig
from ...core.exceptions import ConfigValidationError, NumericContractError, UecLabError
from ...services.experiment import ExperimentService
from ..dependencies import get_experiment_service

router = APIRouter(prefix="/experiments", tags=["experiments"])


class DescribeResponse(BaseModel):
    summary: str


def _http_error(exc: UecLabError) -> HTTPException:
    if isinstance(exc, NumericContractError):
        return HTTPException(status_code=status.HTTP_409_CONFLICT, detail=str(exc))
    if isinstance(exc, ConfigValidationError | ValueError):
        return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc))
    return HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=str(exc))


@router.post("/run")
async def run_experiment(
    config: ExperimentConfig, experiment_service: ExperimentService = Depends(get_experiment_service)
) -> dict:
    try:
        return await experiment_service.run(config)
    except UecLabError as exc:
        raise _http_error(exc) from exc


@router.post("/describe", response_model=DescribeResponse)
async def describe_experiment(
    config: ExperimentConfig, experiment_service: ExperimentService = Depends(get_experiment_service)
):
    try:
        return DescribeResponse(summary=experiment_service.describe(config))
    except UecLabError as exc:
        raise _http_error(exc) from exc
