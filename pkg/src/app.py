"""
FastAPI Application - PGAS molecular dynamics bench.
"""

import logging

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
from fastapi import FastAPI  # noqa: E402

from src.api.router import router  # noqa: E402
from src.config.settings import get_settings  # noqa: E402

logger = logging.getLogger(__name__)
settings = get_settings()

log_level = getattr(logging, settings.log_level.upper(), logging.INFO)
logging.getLogger("src").setLevel(log_level)

app = FastAPI(
    title=settings.app_name,
    description="Linked-cell Lennard-Jones MD with instrumented PGAS access paths",
    version="0.1.0",
)

app.include_router(router, prefix="/api", tags=["api"])


@app.get("/")
def root():
    """Root endpoint with system info."""
    return {
        "name": settings.app_name,
        "version": "0.1.0",
        "docs": "/docs",
        "log_level": settings.log_level,
        "api_max_steps": settings.api_max_steps,
        "oracle_max_molecules": settings.oracle_max_molecules,
    }
