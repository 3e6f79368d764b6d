"""
Unit tests for run parameter validation and the serializable models.
"""
import pytest

from src.config.settings import Settings
from src.errors import ConfigurationError
from src.models import (
    AccessMode,
    Distribution,
    OracleReport,
    RankCounters,
    SimConfig,
    Strategy,
    StrategyDeviation,
    SweepRow,
    SweepSpec,
    load_config,
)


class TestLoadConfig:
    """load_config turns every validation problem into a ConfigurationError."""

    def test_defaults(self):
        """An empty config falls back to the defaults."""
        config = load_config({})
        assert config.grid_dims == (4, 4, 4)
        assert config.strategy is Strategy.LPC_PLUS
        assert config.domain_lengths == (12.0, 12.0, 12.0)
        assert config.node_size == 1

    def test_accepts_model(self):
        """A SimConfig is passed through unchanged."""
        config = SimConfig(ranks=2)
        assert load_config(config) == config

    def test_string_enums(self):
        """Enums parse from their string values."""
        config = load_config({"strategy": "lpm", "distribution": "roundrobin",
                              "access_mode": "shared-only"})
        assert config.strategy is Strategy.LPM
        assert config.distribution is Distribution.ROUND_ROBIN
        assert config.access_mode is AccessMode.SHARED_ONLY

    @pytest.mark.parametrize("overrides", [
        {"grid_dims": (0, 4, 4)},
        {"density": 0.0},
        {"dt": -0.001},
        {"steps": -1},
        {"ranks": 0},
        {"ranks": 65},
        {"strategy": "bogus"},
        {"distribution": "cyclic"},
        {"seed": -1},
        {"lj": {"cutoff": 0.0}},
        {"observable_stride": 0},
    ])
    def test_invalid(self, overrides):
        """Invalid values raise ConfigurationError."""
        with pytest.raises(ConfigurationError):
            load_config(overrides)

    def test_cell_edge_follows_cutoff(self):
        """Cell edge and domain follow the cut-off."""
        config = load_config({"grid_dims": (2, 3, 4), "lj": {"cutoff": 2.5}})
        assert config.cell_edge == 2.5
        assert config.domain_lengths == (5.0, 7.5, 10.0)

    def test_node_size(self):
        """Ranks per node sets the node size."""
        assert load_config({"ranks": 8, "ranks_per_node": 4}).node_size == 4


class TestCounterModels:

    def test_derived_totals(self):
        """Derived counters sum their parts."""
        c = RankCounters(remote_element_reads=3, remote_element_writes=4, bulk_gets=1,
                         bulk_puts=2, local_view_calls=5, shared_path_calls=6)
        assert c.remote_element_accesses == 7
        assert c.bulk_transfers == 3
        assert c.access_path_calls == 11


class TestSweepModels:

    def test_spec_defaults(self):
        """Unset sweep axes get defaults."""
        spec = SweepSpec(rank_counts=[1, 2], strategies=["lpc"])
        assert spec.distributions == [Distribution.BLOCKED]
        assert spec.access_modes == [AccessMode.LOCAL_VIEW]
        assert spec.repetitions == 5

    @pytest.mark.parametrize("payload", [
        {"rank_counts": [], "strategies": ["lpc"]},
        {"rank_counts": [0], "strategies": ["lpc"]},
        {"rank_counts": [1], "strategies": []},
        {"rank_counts": [1], "strategies": ["lpc"], "repetitions": 0},
    ])
    def test_spec_invalid(self, payload):
        """Invalid sweep specs fail validation."""
        with pytest.raises(ValueError):
            SweepSpec.model_validate(payload)

    def test_row_column_order(self):
        """Summary rows start with the combination columns."""
        assert list(SweepRow.model_fields)[:5] == [
            "strategy", "distribution", "access_mode", "ranks", "mean_wall_s"
        ]


class TestOracleReport:

    def _deviation(self, strategy, passed):
        return StrategyDeviation(strategy=strategy, potential=-1.0, max_force_deviation=0.0,
                                 potential_deviation=0.0, net_force=(0, 0, 0), passed=passed)

    def test_passed_requires_every_strategy(self):
        """A report passes only if every strategy passes."""
        report = OracleReport(n_molecules=2, oracle_potential=-1.0, force_tolerance=1e-10,
                              potential_tolerance=1e-12, strategies={
                                  "lpm": self._deviation(Strategy.LPM, True),
                                  "lpc": self._deviation(Strategy.LPC, False),
                              })
        assert report.passed is False
        assert report.model_dump()["passed"] is False


class TestSettings:

    def test_env_override(self, monkeypatch):
        """Environment variables override the defaults."""
        monkeypatch.setenv("ORACLE_MAX_MOLECULES", "64")
        monkeypatch.setenv("BARRIER_TIMEOUT_S", "5")
        settings = Settings(_env_file=None)
        assert settings.oracle_max_molecules == 64
        assert settings.barrier_timeout_s == 5.0
