"""
Unit tests for the partitioned shared space and its access counters.
"""
import numpy as np
import pytest

from src.core.phasespace import MoleculeRecords
from src.errors import (
    AccessModeError,
    AddressingError,
    AffinityError,
    CapacityError,
    PhaseError,
    StalenessError,
)
from src.models import AccessMode, Distribution
from src.pgas.counters import MOLECULE_RECORD_BYTES, POSITION_RECORD_BYTES
from src.pgas.shared_space import Field, Phase


class TestDistribute:
    """Cells land in the partition of their owner."""

    def test_blocked_partitions(self, space_factory):
        """Blocked ownership splits the grid into contiguous halves."""
        space = space_factory(ranks=2)
        assert sorted(space.partition(0)) == list(range(32))
        assert sorted(space.partition(1)) == list(range(32, 64))
        assert space.cell_size(0) == 5
        assert space.cell_size(63) == 1
        assert space.molecule_count() == 6

    def test_round_robin_partitions(self, space_factory):
        """Round-robin ownership deals cells out alternately."""
        space = space_factory(ranks=2, distribution=Distribution.ROUND_ROBIN)
        assert sorted(space.partition(0)) == list(range(0, 64, 2))

    def test_single_rank(self, space_factory):
        """A single rank owns every cell."""
        space = space_factory(ranks=1)
        assert sorted(space.partition(0)) == list(range(64))
        assert space.owned_cells(0) == list(range(64))

    def test_gather_restores_phasespace(self, space_factory):
        """Gathering returns every molecule ordered by id."""
        space = space_factory(ranks=2)
        gathered = space.gather_phasespace()
        assert gathered.molecules.ids.tolist() == list(range(6))
        assert gathered.molecules.positions[5].tolist() == [10.5, 10.5, 10.5]


class TestLocalView:
    """Direct access of an owner."""

    def test_owner_read_counts_local(self, space_factory):
        """Reads through an owner view count as local."""
        space = space_factory()
        view = space.local_view(0, 0)
        assert view.read_position(2).tolist() == pytest.approx([1.3, 0.5, 0.5])
        c = space.counters[0]
        assert c.local_element_reads == 1
        assert c.remote_element_reads == 0
        assert c.local_view_calls == 1

    def test_view_arrays_are_read_only(self, space_factory):
        """View arrays cannot be written."""
        positions = space_factory().local_view(0, 0).positions()
        with pytest.raises(ValueError):
            positions[0, 0] = 1.0

    def test_non_owner_rejected(self, space_factory):
        """Only the owner gets a local view."""
        space = space_factory()
        with pytest.raises(AffinityError):
            space.local_view(0, 63)

    def test_shared_only_rejects_every_view(self, space_factory):
        """In shared-only mode nobody gets a local view."""
        space = space_factory(access_mode=AccessMode.SHARED_ONLY)
        for rank, cell_id in [(0, 0), (1, 63)]:
            with pytest.raises(AccessModeError):
                space.local_view(rank, cell_id)

    def test_add_forces_outside_force_phase(self, space_factory):
        """Forces can only be added during the force phase."""
        space = space_factory()
        space.enter_phase(0, Phase.KICK)
        with pytest.raises(PhaseError):
            space.local_view(0, 0).add_forces(np.ones((5, 3)))


class TestElementAccess:
    """Shared-path element gets and puts."""

    def test_local_and_remote_reads(self, space_factory):
        """Element gets are classified by the owner of the cell."""
        space = space_factory()
        assert space.element_get(0, 0, 0, Field.X) == 0.5
        assert space.element_get(0, 63, 0, Field.Y) == 10.5
        c = space.counters[0]
        assert (c.local_element_reads, c.remote_element_reads) == (1, 1)
        assert c.shared_path_calls == 2

    def test_put_then_get(self, space_factory):
        """A put is visible to the owner's next get."""
        space = space_factory()
        space.element_put(0, 63, 0, Field.FZ, 2.5)
        assert space.element_get(1, 63, 0, Field.FZ) == 2.5
        assert space.counters[0].remote_element_writes == 1
        assert space.counters[1].local_element_reads == 1

    @pytest.mark.parametrize("cell_id, slot, field", [(0, 5, "x"), (63, -1, "x"), (0, 0, "mass")])
    def test_invalid_address(self, space_factory, cell_id, slot, field):
        """Out-of-range slots and unknown fields are rejected."""
        with pytest.raises(AddressingError):
            space_factory().element_get(0, cell_id, slot, field)

    def test_position_write_during_force_phase(self, space_factory):
        """Positions are read-only while forces are computed."""
        space = space_factory()
        space.enter_phase(0, Phase.FORCE)
        with pytest.raises(PhaseError):
            space.element_put(0, 0, 0, Field.X, 1.0)
        space.element_put(0, 0, 0, Field.FX, 1.0)

    def test_inter_node_accounting(self, space_factory):
        """Four ranks, two per node: rank 0 and rank 3 sit on different nodes."""
        space = space_factory(ranks=4, ranks_per_node=2)
        space.element_get(0, 63, 0, Field.X)
        space.element_get(2, 63, 0, Field.X)
        assert space.counters[0].inter_node_element_accesses == 1
        assert space.counters[2].inter_node_element_accesses == 0
        assert space.counters[2].remote_element_reads == 1


class TestBulkTransfers:
    """Prefetch and copy-at-once."""

    def test_bulk_get(self, space_factory):
        """A bulk get copies the cell in one counted transfer."""
        space = space_factory()
        buffer = space.bulk_get(1, 0)
        assert len(buffer) == 5
        assert np.array_equal(buffer.forces, np.zeros((5, 3)))
        c = space.counters[1]
        assert (c.bulk_gets, c.bulk_bytes) == (1, 5 * POSITION_RECORD_BYTES)
        assert c.remote_element_reads == 0

    def test_bulk_get_empty_cell(self, space_factory):
        """Fetching an empty cell still counts one transfer."""
        space = space_factory()
        buffer = space.bulk_get(1, 1)
        assert len(buffer) == 0
        assert space.counters[1].bulk_gets == 1

    def test_zero_buffer_is_identity(self, space_factory):
        """Putting back an untouched buffer leaves the forces unchanged."""
        space = space_factory()
        space.bulk_put_forces(1, space.bulk_get(1, 0))
        assert np.array_equal(space.storage(0).forces[:5], np.zeros((5, 3)))
        assert space.counters[1].bulk_puts == 1

    def test_additive_merge(self, space_factory):
        """Bulk puts add their forces instead of overwriting."""
        space = space_factory()
        space.element_put(0, 0, 0, Field.FX, 1.5)
        first = space.bulk_get(1, 0)
        first.forces[0] = (2.0, 0.0, 0.0)
        second = space.bulk_get(1, 0)
        second.forces[0] = (0.25, 1.0, 0.0)
        space.bulk_put_forces(1, first)
        space.bulk_put_forces(1, second)
        assert space.storage(0).forces[0].tolist() == [3.75, 1.0, 0.0]

    def test_stale_buffer(self, space_factory):
        """A buffer is refused once its cell has changed."""
        space = space_factory()
        buffer = space.bulk_get(1, 0)
        space.take_records(0, 0, np.array([4]))
        with pytest.raises(StalenessError):
            space.bulk_put_forces(1, buffer)


class TestLocks:
    """Ascending-order cell locks."""

    def test_pair_lock_counts(self, space_factory):
        """Locking two cells takes both locks and releases them."""
        space = space_factory()
        with space.locked(0, 63, 0):
            assert space.storage(0).lock.locked()
            assert space.storage(63).lock.locked()
        assert not space.storage(0).lock.locked()
        assert space.counters[0].lock_acquisitions == 2

    def test_same_cell_locks_once(self, space_factory):
        """A cell paired with itself is locked once."""
        space = space_factory()
        with space.locked(0, 5, 5):
            pass
        assert space.counters[0].lock_acquisitions == 1

    def test_released_on_error(self, space_factory):
        """Locks are released when the body raises."""
        space = space_factory()
        with pytest.raises(RuntimeError):
            with space.locked(0, 0, 1):
                raise RuntimeError("boom")
        assert not space.storage(0).lock.locked()
        assert not space.storage(1).lock.locked()


class TestRecordTransfers:
    """Batches of molecule records moved between cells."""

    def test_foreign_batch_is_one_bulk_put(self, space_factory):
        """Records moving to a foreign cell travel as one bulk put."""
        space = space_factory()
        batch = space.take_records(0, 0, np.array([0, 1]))
        space.put_records(0, 62, batch)
        c = space.counters[0]
        assert (c.bulk_puts, c.bulk_bytes) == (1, 2 * MOLECULE_RECORD_BYTES)
        assert space.cell_size(0) == 3
        assert space.cell_size(62) == 2

    def test_remove_keeps_order(self, space_factory):
        """Removing records keeps the order of the rest."""
        space = space_factory()
        space.take_records(0, 0, np.array([1]))
        assert space.storage(0).ids[:4].tolist() == [0, 2, 3, 4]

    def test_only_owner_takes(self, space_factory):
        """Only the owner can take records out of a cell."""
        space = space_factory()
        with pytest.raises(AffinityError):
            space.take_records(1, 0, np.array([0]))

    def test_capacity(self, space_factory):
        """Adding past the capacity is refused."""
        space = space_factory()
        full = space.storage(63)
        extra = MoleculeRecords(
            ids=np.arange(100, 100 + full.capacity, dtype=np.int64),
            positions=np.full((full.capacity, 3), 10.0),
            velocities=np.zeros((full.capacity, 3)),
            forces=np.zeros((full.capacity, 3)),
        )
        with pytest.raises(CapacityError):
            space.put_records(1, 63, extra)
