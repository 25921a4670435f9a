"""Domain decomposition: rank partitions, halos and exchange patterns.

Ranks own contiguous rectangular blocks within panels.  When the rank
count is a multiple of six, each panel is split into an identical p x q
grid of blocks chosen to be as square as possible; otherwise ranks own
contiguous runs of the linearized cell ordering (a documented fallback
with imbalance at most one cell).

Halos are rings of non-owned cells reachable from the owned block by
edge adjacency; the exchange pattern has one message per (owner ->
halo-holder) pair.  In redundant-compute mode halo values are computed
locally instead of exchanged, which empties the message list and adds
the halo cells to each rank's compute extent.
"""

from __future__ import annotations

import io
from bisect import bisect_right
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Set, Tuple

from .mesh import PANELS, CellId, CubedSphereMesh


class DecompositionError(ValueError):
    """Invalid partition request."""


class HaloDepthError(DecompositionError):
    """Requested halo depth exceeds the panel size."""


class Mode(Enum):
    EXCHANGE_HALOS = "exchange_halos"
    REDUNDANT_COMPUTE = "redundant_compute"


class Message(NamedTuple):
    src: int
    dst: int
    cells: int
    bytes: int


def _split_sizes(total: int, parts: int) -> List[int]:
    """Split `total` into `parts` sizes; the remainder is absorbed one
    per block starting from the last block."""
    base, rem = divmod(total, parts)
    sizes = [base] * parts
    for k in range(rem):
        sizes[parts - 1 - k] += 1
    return sizes


def _offsets(sizes: Sequence[int]) -> List[int]:
    out = [0]
    for s in sizes:
        out.append(out[-1] + s)
    return out


@dataclass(frozen=True)
class Block:
    """Half-open rectangular cell range [i0, i1) x [j0, j1) on one panel."""

    panel: int
    i0: int
    i1: int
    j0: int
    j1: int

    @property
    def size(self) -> int:
        return (self.i1 - self.i0) * (self.j1 - self.j0)

    def contains(self, cell: CellId) -> bool:
        return (cell.panel == self.panel
                and self.i0 <= cell.i < self.i1
                and self.j0 <= cell.j < self.j1)

    def cells(self) -> Iterator[CellId]:
        for j in range(self.j0, self.j1):
            for i in range(self.i0, self.i1):
                yield CellId(self.panel, i, j)

    def boundary_cells(self) -> Iterator[CellId]:
        """Cells on the block perimeter (the only ones with outside
        neighbours)."""
        for j in range(self.j0, self.j1):
            edge_row = j in (self.j0, self.j1 - 1)
            for i in range(self.i0, self.i1):
                if edge_row or i in (self.i0, self.i1 - 1):
                    yield CellId(self.panel, i, j)


@dataclass(frozen=True)
class Span:
    """Contiguous run [start, stop) of linearized cell ids (fallback
    domain shape when ranks do not factor as 6*p*q)."""

    start: int
    stop: int

    @property
    def size(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class Decomposition:
    mesh: CubedSphereMesh
    ranks: int
    domains: Tuple[object, ...]  # Block or Span per rank
    mode: Mode = Mode.EXCHANGE_HALOS
    halo_depth: Optional[int] = None
    # per rank: tuple of depth rings, each a sorted tuple of CellId
    halos: Optional[Tuple[Tuple[Tuple[CellId, ...], ...], ...]] = None
    # block-grid metadata (None for span fallback)
    grid: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]] = None

    def owned_cells(self, rank: int) -> Set[CellId]:
        dom = self.domains[rank]
        if isinstance(dom, Block):
            return set(dom.cells())
        return {self.mesh.from_index(k) for k in range(dom.start, dom.stop)}

    def owned_count(self, rank: int) -> int:
        return self.domains[rank].size

    def owner_of(self, cell: CellId) -> int:
        if self.grid is not None:
            i_offsets, j_offsets = self.grid
            p = len(i_offsets) - 1
            q = len(j_offsets) - 1
            bi = bisect_right(i_offsets, cell.i) - 1
            bj = bisect_right(j_offsets, cell.j) - 1
            return cell.panel * p * q + bj * p + bi
        index = self.mesh.to_index(cell)
        # spans are only used for small irregular rank counts; scan
        for rank, dom in enumerate(self.domains):
            if dom.start <= index < dom.stop:
                return rank
        raise DecompositionError(f"cell {cell} not covered by any rank")

    def halo_cells(self, rank: int) -> Tuple[CellId, ...]:
        if self.halos is None:
            raise DecompositionError("halos not computed")
        out: List[CellId] = []
        for ring in self.halos[rank]:
            out.extend(ring)
        return tuple(out)

    def halo_count(self, rank: int) -> int:
        if self.halos is None:
            raise DecompositionError("halos not computed")
        return sum(len(ring) for ring in self.halos[rank])

    @property
    def max_owned(self) -> int:
        return max(d.size for d in self.domains)

    @property
    def min_owned(self) -> int:
        return min(d.size for d in self.domains)


@dataclass(frozen=True)
class ExchangePattern:
    messages: Tuple[Message, ...]
    bytes_per_cell: int

    @property
    def total_bytes(self) -> int:
        return sum(m.bytes for m in self.messages)

    @property
    def total_cells(self) -> int:
        return sum(m.cells for m in self.messages)

    def messages_for(self, rank: int) -> Tuple[Message, ...]:
        return tuple(m for m in self.messages if m.src == rank or m.dst == rank)

    def bytes_out(self, rank: int) -> int:
        return sum(m.bytes for m in self.messages if m.src == rank)

    def bytes_in(self, rank: int) -> int:
        return sum(m.bytes for m in self.messages if m.dst == rank)

    def neighbor_count(self, rank: int) -> int:
        return len({m.dst for m in self.messages if m.src == rank})


def _squarest_factor_pair(m: int) -> Tuple[int, int]:
    """Factor m = p * q with the block aspect ratio closest to one;
    ties broken toward larger p."""
    best = None
    for p in range(1, m + 1):
        if m % p:
            continue
        q = m // p
        key = (abs(p - q), -p)
        if best is None or key < best[0]:
            best = (key, (p, q))
    return best[1]


def partition(mesh: CubedSphereMesh, ranks: int,
              mode: Mode = Mode.EXCHANGE_HALOS) -> Decomposition:
    """Assign every cell to exactly one rank.

    Rank counts divisible by six get identical per-panel block grids
    (rank = panel * p * q + bj * p + bi); other counts fall back to
    contiguous runs of linearized cells.
    """
    if ranks < 1:
        raise DecompositionError(f"ranks must be >= 1, got {ranks}")
    total = mesh.total_horizontal_cells
    if ranks > total:
        raise DecompositionError(
            f"more ranks ({ranks}) than cells ({total})")
    n = mesh.panel_size
    if ranks % PANELS == 0 and ranks // PANELS <= n * n:
        m = ranks // PANELS
        p, q = _squarest_factor_pair(m)
        if p <= n and q <= n:
            i_sizes = _split_sizes(n, p)
            j_sizes = _split_sizes(n, q)
            i_off = _offsets(i_sizes)
            j_off = _offsets(j_sizes)
            domains: List[Block] = []
            for panel in range(PANELS):
                for bj in range(q):
                    for bi in range(p):
                        domains.append(Block(panel,
                                             i_off[bi], i_off[bi + 1],
                                             j_off[bj], j_off[bj + 1]))
            return Decomposition(mesh=mesh, ranks=ranks,
                                 domains=tuple(domains), mode=mode,
                                 grid=(tuple(i_off), tuple(j_off)))
    sizes = _split_sizes(total, ranks)
    sizes.reverse()  # larger chunks first for a stable layout
    off = _offsets(sizes)
    spans = tuple(Span(off[k], off[k + 1]) for k in range(ranks))
    return Decomposition(mesh=mesh, ranks=ranks, domains=spans, mode=mode)


def local_area(mesh: CubedSphereMesh, total_cores: int) -> Fraction:
    """Horizontal grid cells per core."""
    if total_cores < 1:
        raise DecompositionError(f"total_cores must be >= 1, got {total_cores}")
    return Fraction(mesh.total_horizontal_cells, total_cores)


def compute_halos(mesh: CubedSphereMesh, decomp: Decomposition,
                  depth: int = 1) -> Decomposition:
    """Fill per-rank halo rings up to `depth` by frontier expansion."""
    if depth < 1:
        raise DecompositionError(f"halo depth must be >= 1, got {depth}")
    if depth > mesh.panel_size:
        raise HaloDepthError(
            f"halo depth {depth} exceeds panel size {mesh.panel_size}")
    all_halos = []
    for rank in range(decomp.ranks):
        dom = decomp.domains[rank]
        if isinstance(dom, Block):
            owned_test = dom.contains
            frontier: Set[CellId] = set(dom.boundary_cells())
        else:
            owned = decomp.owned_cells(rank)
            owned_test = owned.__contains__
            frontier = owned
        seen: Set[CellId] = set()
        rings: List[Tuple[CellId, ...]] = []
        for _ in range(depth):
            ring: Set[CellId] = set()
            for cell in frontier:
                for nb in mesh.neighbors(cell):
                    if nb not in seen and not owned_test(nb):
                        ring.add(nb)
            seen |= ring
            rings.append(tuple(sorted(ring, key=mesh.to_index)))
            frontier = ring
        all_halos.append(tuple(rings))
    return replace(decomp, halo_depth=depth, halos=tuple(all_halos))


def default_bytes_per_cell(mesh: CubedSphereMesh, fields: int = 3,
                           word_bytes: int = 8) -> int:
    """Bytes exchanged per halo cell: levels x word size x field count.

    The field count per exchange is a configuration default, not a
    measured quantity."""
    return mesh.levels * word_bytes * fields


def exchange_pattern(decomp: Decomposition,
                     bytes_per_cell: Optional[int] = None) -> ExchangePattern:
    """One message per (owner -> halo-holder) pair with shared cells.

    Redundant-compute mode eliminates every exchange up to the redundant
    depth, which equals the halo depth, so the pattern is empty.
    """
    if decomp.halos is None:
        raise DecompositionError("halos not computed")
    if bytes_per_cell is None:
        bytes_per_cell = default_bytes_per_cell(decomp.mesh)
    if bytes_per_cell < 1:
        raise DecompositionError("bytes_per_cell must be positive")
    if decomp.mode is Mode.REDUNDANT_COMPUTE:
        return ExchangePattern(messages=(), bytes_per_cell=bytes_per_cell)
    counts: Dict[Tuple[int, int], int] = {}
    for rank in range(decomp.ranks):
        for ring in decomp.halos[rank]:
            for cell in ring:
                owner = decomp.owner_of(cell)
                counts[(owner, rank)] = counts.get((owner, rank), 0) + 1
    messages = tuple(Message(src, dst, c, c * bytes_per_cell)
                     for (src, dst), c in sorted(counts.items()))
    return ExchangePattern(messages=messages, bytes_per_cell=bytes_per_cell)


def redundant_compute_extent(decomp: Decomposition) -> Dict[int, int]:
    """Extra cells each rank computes instead of receiving."""
    if decomp.mode is not Mode.REDUNDANT_COMPUTE:
        raise DecompositionError(
            "redundant_compute_extent requires redundant-compute mode")
    if decomp.halos is None:
        raise DecompositionError("halos not computed")
    return {rank: decomp.halo_count(rank) for rank in range(decomp.ranks)}


def summary_csv(decomp: Decomposition, pattern: ExchangePattern) -> str:
    """Per-rank decomposition summary: rank,owned,halo,neighbors,bytes_out."""
    out = io.StringIO()
    out.write("rank,owned,halo,neighbors,bytes_out\n")
    for rank in range(decomp.ranks):
        out.write(f"{rank},{decomp.owned_count(rank)},"
                  f"{decomp.halo_count(rank)},"
                  f"{pattern.neighbor_count(rank)},"
                  f"{pattern.bytes_out(rank)}\n")
    return out.getvalue()
