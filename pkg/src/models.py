"""
Pydantic models for run parameters, observables, counters and reports.
"""
from enum import StrEnum
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    computed_field,
    model_validator,
)

from src.errors import ConfigurationError


class Strategy(StrEnum):
    """Synchronization strategy of the force calculation."""
    LPM = "lpm"
    LPC = "lpc"
    LPC_PLUS = "lpc+"


class Distribution(StrEnum):
    """How cell IDs are dealt out to ranks."""
    BLOCKED = "blocked"
    ROUND_ROBIN = "roundrobin"


class AccessMode(StrEnum):
    """Whether owners may bypass the shared access path for their own cells."""
    LOCAL_VIEW = "local"
    SHARED_ONLY = "shared-only"


class Schedule(StrEnum):
    """How rank threads are interleaved between barriers."""
    LOCKSTEP = "lockstep"
    THREADED = "threaded"


class LjParams(BaseModel):
    """Lennard-Jones parameters in reduced units."""
    model_config = ConfigDict(frozen=True)

    sigma: float = Field(default=1.0, gt=0)
    epsilon: float = Field(default=1.0, gt=0)
    cutoff: float = Field(default=3.0, gt=0)
    shift_potential: bool = False


class SimConfig(BaseModel):
    """All parameters of a single simulation run."""
    model_config = ConfigDict(frozen=True)

    grid_dims: Tuple[int, int, int] = (4, 4, 4)
    density: float = Field(default=0.5, gt=0)
    lj: LjParams = LjParams()
    dt: float = Field(default=0.001, gt=0)
    steps: int = Field(default=10, ge=0)
    ranks: int = Field(default=1, ge=1)
    strategy: Strategy = Strategy.LPC_PLUS
    distribution: Distribution = Distribution.BLOCKED
    seed: int = Field(default=42, ge=0, lt=2**64)
    access_mode: AccessMode = AccessMode.LOCAL_VIEW

    temperature: float = Field(default=1.0, ge=0)
    observable_stride: int = Field(default=1, ge=1)
    schedule: Schedule = Schedule.LOCKSTEP
    ranks_per_node: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_grid(self) -> "SimConfig":
        if any(n < 1 for n in self.grid_dims):
            raise ValueError(f"grid dimensions must be positive, got {self.grid_dims}")
        if self.ranks > self.cell_count:
            raise ValueError(
                f"ranks ({self.ranks}) exceed the number of cells ({self.cell_count})"
            )
        return self

    @property
    def cell_edge(self) -> float:
        """Cell edge length; always the cut-off radius."""
        return self.lj.cutoff

    @property
    def cell_count(self) -> int:
        nx, ny, nz = self.grid_dims
        return nx * ny * nz

    @property
    def domain_lengths(self) -> Tuple[float, float, float]:
        nx, ny, nz = self.grid_dims
        edge = self.cell_edge
        return (nx * edge, ny * edge, nz * edge)

    @property
    def node_size(self) -> int:
        return self.ranks_per_node or self.ranks


def load_config(data: Union[SimConfig, Mapping[str, Any]]) -> SimConfig:
    """Validate run parameters, reporting problems as ConfigurationError."""
    payload = data.model_dump() if isinstance(data, SimConfig) else dict(data)
    try:
        return SimConfig.model_validate(payload)
    except ValidationError as e:
        raise ConfigurationError(str(e)) from e


class StepObservables(BaseModel):
    """Globally reduced observables of one recorded step."""
    step: int
    kinetic: float
    potential: float
    total: float
    temperature: float


class RankCounters(BaseModel):
    """Serializable access counters of one rank (or their totals)."""
    local_element_reads: int = 0
    local_element_writes: int = 0
    remote_element_reads: int = 0
    remote_element_writes: int = 0
    bulk_gets: int = 0
    bulk_puts: int = 0
    bulk_bytes: int = 0
    lock_acquisitions: int = 0
    # access-path and node accounting
    local_view_calls: int = 0
    shared_path_calls: int = 0
    inter_node_element_accesses: int = 0
    inter_node_transfers: int = 0

    @property
    def remote_element_accesses(self) -> int:
        return self.remote_element_reads + self.remote_element_writes

    @property
    def bulk_transfers(self) -> int:
        return self.bulk_gets + self.bulk_puts

    @property
    def access_path_calls(self) -> int:
        return self.local_view_calls + self.shared_path_calls


class CounterSnapshot(BaseModel):
    """Per-rank counters plus their totals, as exported to JSON."""
    ranks: List[RankCounters]
    totals: RankCounters


class SweepSpec(BaseModel):
    """Experiment grid of a strong-scaling sweep."""
    rank_counts: List[int] = Field(min_length=1)
    strategies: List[Strategy] = Field(min_length=1)
    distributions: List[Distribution] = Field(default=[Distribution.BLOCKED], min_length=1)
    access_modes: List[AccessMode] = Field(default=[AccessMode.LOCAL_VIEW], min_length=1)
    repetitions: int = Field(default=5, ge=1)
    ranks_per_node: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_ranks(self) -> "SweepSpec":
        if any(r < 1 for r in self.rank_counts):
            raise ValueError(f"rank counts must be positive, got {self.rank_counts}")
        return self


class SweepRow(BaseModel):
    """One summary row of a sweep; column order is the CSV schema."""
    strategy: Strategy
    distribution: Distribution
    access_mode: AccessMode
    ranks: int
    mean_wall_s: Optional[float] = None
    remote_element_reads: Optional[int] = None
    remote_element_writes: Optional[int] = None
    bulk_gets: Optional[int] = None
    bulk_puts: Optional[int] = None
    bulk_bytes: Optional[int] = None
    lock_acquisitions: Optional[int] = None
    ranks_per_node: Optional[int] = None
    std_wall_s: Optional[float] = None
    inter_node_element_accesses: Optional[int] = None
    status: str = "ok"
    error: Optional[str] = None


class StrategyDeviation(BaseModel):
    """Linked-cell result of one strategy compared with the all-pairs oracle."""
    strategy: Strategy
    potential: float
    max_force_deviation: float
    potential_deviation: float
    net_force: Tuple[float, float, float]
    passed: bool


class OracleReport(BaseModel):
    """Outcome of an all-pairs verification."""
    n_molecules: int
    oracle_potential: float
    force_tolerance: float
    potential_tolerance: float
    strategies: Dict[str, StrategyDeviation] = {}

    @computed_field
    @property
    def passed(self) -> bool:
        return all(dev.passed for dev in self.strategies.values())


class RunResponse(BaseModel):
    """Serializable outcome of a run, as returned by the HTTP surface."""
    config: SimConfig
    observables: List[StepObservables]
    counters: CounterSnapshot
    wall_time_s: float
