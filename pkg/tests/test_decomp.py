"""Decomposition, halo and exchange-pattern tests.

Halo expectations come from an independent breadth-first expansion over
the fully materialized adjacency map, not from the frontier walk used by
the implementation.
"""

from fractions import Fraction

import pytest

from cubedsim import decomp as dc
from cubedsim.mesh import build_mesh


def bfs_halo(mesh, owned, depth):
    """Oracle: rings of non-owned cells reachable in <= depth steps."""
    seen = set(owned)
    frontier = set(owned)
    rings = []
    for _ in range(depth):
        ring = set()
        for cell in frontier:
            for nb in mesh.adjacency[cell]:
                if nb not in seen:
                    ring.add(nb)
        seen |= ring
        rings.append(ring)
        frontier = ring
    return rings


@pytest.mark.parametrize("n,ranks,expected_owned", [
    (8, 6, 64), (8, 24, 16), (8, 96, 4), (16, 24, 64), (12, 54, 16),
])
def test_block_partition_sizes(n, ranks, expected_owned):
    mesh = build_mesh(n, 1)
    decomposition = dc.partition(mesh, ranks)
    assert decomposition.grid is not None
    for rank in range(ranks):
        assert decomposition.owned_count(rank) == expected_owned


def test_partition_conservation_blocks():
    mesh = build_mesh(8, 1)
    decomposition = dc.partition(mesh, 24)
    union = set()
    total = 0
    for rank in range(24):
        owned = decomposition.owned_cells(rank)
        assert not (union & owned)
        union |= owned
        total += len(owned)
    assert total == mesh.total_horizontal_cells
    assert union == set(mesh.cells())


def test_partition_conservation_spans():
    mesh = build_mesh(6, 1)
    decomposition = dc.partition(mesh, 7)  # not a multiple of six
    assert decomposition.grid is None
    union = set()
    for rank in range(7):
        union |= decomposition.owned_cells(rank)
    assert union == set(mesh.cells())
    assert decomposition.max_owned - decomposition.min_owned <= 1


def test_owner_of_agrees_with_owned_cells():
    mesh = build_mesh(8, 1)
    for ranks in (24, 7):
        decomposition = dc.partition(mesh, ranks)
        for rank in range(ranks):
            for cell in decomposition.owned_cells(rank):
                assert decomposition.owner_of(cell) == rank


def test_partition_errors():
    mesh = build_mesh(4, 1)
    with pytest.raises(dc.DecompositionError):
        dc.partition(mesh, 0)
    with pytest.raises(dc.DecompositionError):
        dc.partition(mesh, mesh.total_horizontal_cells + 1)


def test_local_area_is_exact():
    assert dc.local_area(build_mesh(512, 120), 48 * 128) == 256
    assert dc.local_area(build_mesh(512, 120), 96 * 128) == 128
    assert dc.local_area(build_mesh(8, 1), 36) == Fraction(384, 36)
    with pytest.raises(dc.DecompositionError):
        dc.local_area(build_mesh(8, 1), 0)


@pytest.mark.parametrize("n,ranks,depth", [
    (8, 6, 1), (8, 6, 2), (8, 24, 1), (8, 24, 3), (6, 5, 1), (6, 5, 2),
])
def test_halos_match_bfs_oracle(n, ranks, depth):
    mesh = build_mesh(n, 1)
    decomposition = dc.compute_halos(mesh, dc.partition(mesh, ranks),
                                     depth=depth)
    for rank in range(ranks):
        expected = bfs_halo(mesh, decomposition.owned_cells(rank), depth)
        for d in range(depth):
            assert set(decomposition.halos[rank][d]) == expected[d]
        assert decomposition.halo_count(rank) == sum(map(len, expected))


def test_whole_panel_halo_is_its_perimeter():
    # one rank per panel: the depth-1 halo is the 4n cells ringing the
    # panel on the four adjacent panels
    mesh = build_mesh(8, 1)
    decomposition = dc.compute_halos(mesh, dc.partition(mesh, 6), depth=1)
    for rank in range(6):
        assert decomposition.halo_count(rank) == 4 * 8


def test_halo_depth_errors():
    mesh = build_mesh(4, 1)
    decomposition = dc.partition(mesh, 6)
    with pytest.raises(dc.DecompositionError):
        dc.compute_halos(mesh, decomposition, depth=0)
    with pytest.raises(dc.HaloDepthError):
        dc.compute_halos(mesh, decomposition, depth=5)
    with pytest.raises(dc.DecompositionError):
        decomposition.halo_count(0)  # halos not computed yet


def test_exchange_pattern_counts_match_halos():
    mesh = build_mesh(8, 1)
    decomposition = dc.compute_halos(mesh, dc.partition(mesh, 24), depth=1)
    pattern = dc.exchange_pattern(decomposition, bytes_per_cell=10)
    total_halo = sum(decomposition.halo_count(r) for r in range(24))
    assert pattern.total_cells == total_halo
    assert pattern.total_bytes == 10 * total_halo
    for message in pattern.messages:
        assert message.src != message.dst
        assert message.bytes == message.cells * 10
    # every rank both sends and receives in a symmetric block layout
    for rank in range(24):
        assert pattern.bytes_out(rank) > 0
        assert pattern.bytes_in(rank) > 0
        assert pattern.neighbor_count(rank) >= 4


def test_message_cells_are_owner_boundary():
    mesh = build_mesh(8, 1)
    decomposition = dc.compute_halos(mesh, dc.partition(mesh, 6), depth=1)
    pattern = dc.exchange_pattern(decomposition)
    for message in pattern.messages:
        owned = decomposition.owned_cells(message.src)
        halo = set(decomposition.halos[message.dst][0])
        assert message.cells == len(owned & halo)


def test_default_bytes_per_cell():
    mesh = build_mesh(8, 120)
    assert dc.default_bytes_per_cell(mesh) == 120 * 8 * 3 == 2880
    assert dc.default_bytes_per_cell(mesh, fields=1, word_bytes=4) == 480


def test_redundant_mode_trades_messages_for_cells():
    mesh = build_mesh(8, 1)
    decomposition = dc.compute_halos(
        mesh, dc.partition(mesh, 24, mode=dc.Mode.REDUNDANT_COMPUTE), depth=1)
    pattern = dc.exchange_pattern(decomposition)
    assert pattern.messages == ()
    extent = dc.redundant_compute_extent(decomposition)
    for rank in range(24):
        assert extent[rank] == decomposition.halo_count(rank)
    exchanging = dc.compute_halos(mesh, dc.partition(mesh, 24), depth=1)
    with pytest.raises(dc.DecompositionError):
        dc.redundant_compute_extent(exchanging)


def test_halo_factor_law_on_c64():
    # quadrupling per-rank area doubles the per-rank halo and halves the
    # total halo volume; exactly 4x fewer ranks participate
    mesh = build_mesh(64, 1)
    per_rank = {}
    total = {}
    for ranks in (24, 96, 384):
        d = dc.compute_halos(mesh, dc.partition(mesh, ranks), depth=1)
        counts = [d.halo_count(r) for r in range(ranks)]
        assert len(set(counts)) == 1  # square blocks, identical halos
        per_rank[ranks] = counts[0]
        total[ranks] = sum(counts)
    assert per_rank[24] == 2 * per_rank[96] == 4 * per_rank[384]
    assert total[384] == 2 * total[96] == 4 * total[24]


def test_summary_csv_shape():
    mesh = build_mesh(8, 1)
    decomposition = dc.compute_halos(mesh, dc.partition(mesh, 6), depth=1)
    pattern = dc.exchange_pattern(decomposition)
    lines = dc.summary_csv(decomposition, pattern).strip().splitlines()
    assert lines[0] == "rank,owned,halo,neighbors,bytes_out"
    assert len(lines) == 7
    first = lines[1].split(",")
    assert first[0] == "0" and first[1] == "64"
