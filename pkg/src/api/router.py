"""
API Router - FastAPI routes.
"""
import logging

from fastapi import APIRouter, HTTPException

from src.bench.oracle import oracle_check
from src.config.settings import get_settings
from src.errors import ConfigurationError, EngineError, OracleLimitError
from src.models import OracleReport, RunResponse, SimConfig
from src.simulation import run

router = APIRouter()
logger = logging.getLogger(__name__)


@router.get("/health")
def health_check():
    """Health check endpoint."""
    return {
        "status": "healthy",
        "service": "pgas-md-bench",
        "version": "0.1.0",
    }


@router.post("/run", response_model=RunResponse)
def run_simulation(config: SimConfig) -> RunResponse:
    """Run one simulation and return its observables and counters."""
    settings = get_settings()
    if config.steps > settings.api_max_steps:
        raise HTTPException(
            status_code=422,
            detail=f"steps ({config.steps}) exceed the API limit of {settings.api_max_steps}",
        )
    logger.info(f"Run request: {config.strategy}, {config.ranks} ranks, {config.steps} steps")
    try:
        result = run(config, settings=settings)
    except ConfigurationError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except EngineError as e:
        logger.error(f"Run error: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail=str(e))
    return RunResponse(
        config=result.config,
        observables=result.observables,
        counters=result.counters,
        wall_time_s=result.wall_time_s,
    )


@router.post("/oracle", response_model=OracleReport)
def oracle(config: SimConfig) -> OracleReport:
    """Verify the linked-cell forces of a configuration against all-pairs summation."""
    try:
        return oracle_check(config, settings=get_settings())
    except (OracleLimitError, ConfigurationError) as e:
        raise HTTPException(status_code=422, detail=str(e))
    except EngineError as e:
        logger.error(f"Oracle error: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail=str(e))
