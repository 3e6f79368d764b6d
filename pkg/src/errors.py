"""
Exception hierarchy for the simulation engine.
"""
from typing import Optional


class EngineError(RuntimeError):
    """Base class for every error raised by the engine."""


class ConfigurationError(EngineError, ValueError):
    """Run parameters violate a configuration invariant."""


class GenerationError(EngineError):
    """The grid generator cannot place molecules for the requested parameters."""


class GridDomainError(EngineError, IndexError):
    """A cell index or cell ID lies outside the grid."""


class ContainmentError(EngineError):
    """A molecule position lies outside the periodic domain."""


class AffinityError(EngineError):
    """A rank asked for direct access to data it does not own."""


class AccessModeError(AffinityError):
    """Local views are disabled in the shared-only access mode."""


class AddressingError(EngineError, IndexError):
    """An element access names a slot or field that does not exist."""


class StalenessError(EngineError):
    """A prefetch buffer no longer matches the cell it was fetched from."""


class SingularityError(EngineError):
    """Two molecules occupy the same position."""


class StabilityError(EngineError):
    """A molecule would travel at least one cell edge in a single step."""


class CapacityError(EngineError):
    """A cell has no free slot for an incoming molecule."""


class PhaseError(EngineError):
    """A field was written during a phase that forbids it."""


class CollectiveAbortedError(EngineError):
    """A collective operation was abandoned because a peer rank failed."""


class OracleLimitError(EngineError):
    """The all-pairs oracle was asked to evaluate too many molecules."""


class StepFailedError(EngineError):
    """A time step failed; carries the step index and the underlying error."""

    def __init__(self, step: int, cause: Optional[BaseException] = None) -> None:
        self.step = step
        self.cause = cause
        super().__init__(f"Simulation aborted at step {step}: {cause}")
