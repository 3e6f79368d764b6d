"""
Integration tests for complete runs: observables, failure reporting, energy
conservation and independence of the decomposition.
"""
import numpy as np
import pytest

from src.errors import SingularityError, StabilityError, StepFailedError
from src.models import Distribution, Schedule, Strategy
from src.simulation import evaluate_forces, run

R_MIN = 2.0 ** (1.0 / 6.0)


class TestRun:

    def test_zero_steps(self, make_config, settings):
        """Zero steps still records the initial observables."""
        result = run(make_config(steps=0, density=0.1), settings=settings)
        assert [o.step for o in result.observables] == [0]
        assert result.observables[0].kinetic > 0.0

    def test_pair_at_rest_in_minimum(self, make_config, molecules_phasespace, settings):
        """Two molecules at the potential minimum feel no force and stay put."""
        config = make_config(steps=100, ranks=2)
        ps = molecules_phasespace(config, [((4.0, 1.5, 1.5),), ((4.0 + R_MIN, 1.5, 1.5),)])
        result = run(config, ps, settings)
        assert len(result.observables) == 101
        for obs in result.observables:
            assert obs.kinetic < 1e-20
            assert obs.potential == pytest.approx(-1.0, abs=1e-12)
        assert np.allclose(result.phasespace.molecules.positions, ps.molecules.positions,
                           rtol=0, atol=1e-12)

    @pytest.mark.parametrize("steps, stride, recorded", [
        (7, 3, [0, 3, 6, 7]),
        (6, 3, [0, 3, 6]),
        (2, 5, [0, 2]),
    ])
    def test_observable_stride(self, make_config, settings, steps, stride, recorded):
        """Observables are recorded at step 0, on the stride and at the last step."""
        config = make_config(steps=steps, observable_stride=stride, density=0.1)
        result = run(config, settings=settings)
        assert [o.step for o in result.observables] == recorded

    def test_temperature(self, make_config, settings):
        """Temperature and total energy follow from kinetic and potential energy."""
        result = run(make_config(steps=0, density=0.1), settings=settings)
        obs = result.observables[0]
        n = len(result.phasespace)
        assert obs.temperature == pytest.approx(2.0 * obs.kinetic / (3.0 * n))
        assert obs.total == obs.kinetic + obs.potential

    @pytest.mark.parametrize("schedule", list(Schedule))
    def test_unstable_step_reports_index(self, make_config, molecules_phasespace, settings,
                                         schedule):
        """A molecule moving too far fails the step it moved in."""
        config = make_config(steps=5, dt=1.0, ranks=2, schedule=schedule)
        ps = molecules_phasespace(config, [((1.0, 1.0, 1.0), (4.0, 0.0, 0.0)),
                                           ((10.0, 10.0, 10.0),)])
        with pytest.raises(StepFailedError) as info:
            run(config, ps, settings)
        assert info.value.step == 1
        assert isinstance(info.value.cause, StabilityError)

    def test_initial_force_failure_is_step_zero(self, make_config, molecules_phasespace,
                                                settings):
        """Coinciding molecules fail the initial force evaluation, reported as step 0."""
        config = make_config(steps=3, ranks=2)
        ps = molecules_phasespace(config, [((1.0, 1.0, 1.0),), ((1.0, 1.0, 1.0),)])
        with pytest.raises(StepFailedError) as info:
            run(config, ps, settings)
        assert info.value.step == 0
        assert isinstance(info.value.cause, SingularityError)

    def test_lockstep_is_bitwise_repeatable(self, make_config, settings):
        """Lockstep runs repeat observables, counters and positions exactly."""
        config = make_config(steps=5, ranks=4, density=0.3, dt=0.002)
        first = run(config, settings=settings)
        second = run(config, settings=settings)
        assert first.observables == second.observables
        assert first.counters == second.counters
        assert np.array_equal(first.phasespace.molecules.positions,
                              second.phasespace.molecules.positions)

    @pytest.mark.parametrize("ranks", [2, 4, 8])
    def test_observables_match_single_rank(self, make_config, settings, ranks):
        """Observables do not depend on the rank count."""
        base = run(make_config(steps=5, density=0.3, dt=0.002), settings=settings)
        result = run(make_config(steps=5, density=0.3, dt=0.002, ranks=ranks), settings=settings)
        for a, b in zip(base.observables, result.observables):
            assert b.total == pytest.approx(a.total, rel=1e-10)
            assert b.kinetic == pytest.approx(a.kinetic, rel=1e-10)


class TestDecompositionInvariance:
    """Forces do not depend on rank count, distribution or strategy."""

    @pytest.fixture
    def system(self, make_config, lattice_phasespace):
        config = make_config(density=0.3)
        return config, lattice_phasespace(config, jitter=0.2)

    @pytest.fixture
    def reference(self, system, settings):
        config, ps = system
        return evaluate_forces(config, ps, Strategy.LPC, settings)

    @pytest.mark.parametrize("strategy", list(Strategy))
    @pytest.mark.parametrize("ranks", [1, 2, 4, 8])
    @pytest.mark.parametrize("distribution", list(Distribution))
    def test_forces(self, system, reference, settings, strategy, ranks, distribution):
        """Forces agree with the single-rank reference for every decomposition."""
        config, ps = system
        config = config.model_copy(update={"ranks": ranks, "distribution": distribution})
        result = evaluate_forces(config, ps, strategy, settings)
        assert np.array_equal(result.ids, reference.ids)
        scale = np.abs(reference.forces).max()
        assert np.abs(result.forces - reference.forces).max() <= 1e-12 * scale
        assert result.potential == pytest.approx(reference.potential, rel=1e-12)

    def test_net_force_vanishes(self, reference):
        """Newton's third law leaves no net force."""
        assert np.allclose(reference.forces.sum(axis=0), 0.0, atol=1e-9)


@pytest.mark.slow
class TestEnergyConservation:

    def test_total_energy_drift(self, make_config, settings):
        """729 molecules, shifted potential, 1000 steps: relative drift below 1e-3."""
        config = make_config(
            density=0.45, steps=1000, dt=0.001, ranks=4, strategy=Strategy.LPC_PLUS,
            lj={"shift_potential": True}, observable_stride=100,
        )
        result = run(config, settings=settings)
        assert len(result.phasespace) == 729
        e0 = result.observables[0].total
        for obs in result.observables:
            assert abs(obs.total - e0) / abs(e0) < 1e-3
