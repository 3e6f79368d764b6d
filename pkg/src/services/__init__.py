"""Infrastructure services."""

from .logger import RunLogger

__all__ = ["RunLogger"]
