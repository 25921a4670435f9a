"""Discrete-event simulation of a client/server I/O offload system.

Simulation clients advance through compute intervals and emit their
share of each diagnostic field into a fixed-size local buffer.  An
emission is an instant copy when buffer space exists; otherwise the
client blocks until its server drains enough space, and the blocked
time accrues to the buffer-wait metric.

Servers come in one or two levels.  Single-level servers drain their
statically assigned clients (round-robin by client id) and write at an
effective rate.  In a two-level setup, level-1 servers gather from
clients at a fast internal transfer rate and forward to the level-2
servers of their pool, and only level-2 servers pay the write cost;
gathered-but-unwritten data occupies server-side staging memory.

The effective write rate of a server in a pool with S servers and F
assigned files (files are distributed round-robin over pools) is

    base_write_rate * min(striping_factor, stripe_cap)
                    * min(1, F / S) / (1 + pool_penalty * (S - 1))

so striping multiplies bandwidth, a pool cannot keep more writers busy
than it has files, and collective writing by many servers of one pool
scales poorly.  All of this is calibration, not a file-system model.

The event loop is deterministic: ties are broken by (time, client id,
event order), and identical scenarios produce identical metrics.
Independent subsystems (a server and its clients; a pool) are simulated
independently and identical ones are deduplicated, which is exact
because nothing couples them.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

from . import workload
from .workload import DiagnosticSchedule

MIB = 1024.0 * 1024.0
_EPS = 1e-6  # bytes; absorbs float rounding in buffer bookkeeping


class IoConfigError(ValueError):
    """Invalid I/O scenario."""


class UnwritableFieldError(IoConfigError):
    """UNWRITABLE_FIELD: a single field share exceeds the client buffer."""


class ServerMemoryError(RuntimeError):
    """OUT_OF_MEMORY: aggregate server-side staging exceeds the limit."""


@dataclass(frozen=True)
class IoScenario:
    clients: int
    servers_level1: int
    servers_level2: int
    pools: int
    buffer_bytes: int
    base_write_rate: float      # bytes/s nominal per server
    striping_factor: float
    files: int
    schedule: DiagnosticSchedule
    compute_rate: float         # simulated seconds of compute per model hour
    gather_rate_factor: float = 4.0
    pool_penalty: float = 0.25
    stripe_cap: float = 8.0
    server_memory_bytes: Optional[int] = None

    def __post_init__(self):
        if self.clients < 1:
            raise IoConfigError(f"clients must be >= 1, got {self.clients}")
        if self.servers_level1 < 0 or self.servers_level2 < 0:
            raise IoConfigError("server counts must be >= 0")
        if self.servers_level1 + self.servers_level2 < 1:
            raise IoConfigError("at least one server is required")
        if self.pools < 1:
            raise IoConfigError(f"pools must be >= 1, got {self.pools}")
        if self.servers_level2 and self.servers_level2 % self.pools:
            raise IoConfigError(
                f"servers_level2 ({self.servers_level2}) not divisible by "
                f"pools ({self.pools})")
        if self.writer_count % self.pools:
            raise IoConfigError(
                f"writing servers ({self.writer_count}) not divisible by "
                f"pools ({self.pools})")
        if self.pools > self.files:
            raise IoConfigError(
                f"pools ({self.pools}) exceed files ({self.files}); every "
                f"pool needs at least one file")
        if self.buffer_bytes < 1:
            raise IoConfigError("buffer_bytes must be positive")
        if self.base_write_rate <= 0:
            raise IoConfigError("base_write_rate must be positive")
        if self.striping_factor < 1:
            raise IoConfigError("striping_factor must be >= 1")
        if self.files < 1:
            raise IoConfigError("files must be positive")
        if self.compute_rate < 0:
            raise IoConfigError("compute_rate must be >= 0")
        if self.gather_rate_factor <= 0 or self.stripe_cap < 1:
            raise IoConfigError("invalid transfer/striping parameters")
        if self.pool_penalty < 0:
            raise IoConfigError("pool_penalty must be >= 0")

    @property
    def two_level(self) -> bool:
        return self.servers_level1 > 0 and self.servers_level2 > 0

    @property
    def writer_count(self) -> int:
        return self.servers_level2 if self.two_level else \
            (self.servers_level1 or self.servers_level2)

    @property
    def striping_mult(self) -> float:
        return min(self.striping_factor, self.stripe_cap)

    def files_in_pool(self, pool: int) -> int:
        base, rem = divmod(self.files, self.pools)
        return base + (1 if pool < rem else 0)

    def writer_rate(self, pool: int) -> float:
        """Effective bytes/s of one writing server in the given pool."""
        s_pool = self.writer_count // self.pools
        f_pool = self.files_in_pool(pool)
        return (self.base_write_rate * self.striping_mult
                * min(1.0, f_pool / s_pool)
                / (1.0 + self.pool_penalty * (s_pool - 1)))

    @property
    def gather_rate(self) -> float:
        return self.base_write_rate * self.gather_rate_factor

    @property
    def aggregate_write_rate(self) -> float:
        """Sum of effective rates over all writing servers."""
        s_pool = self.writer_count // self.pools
        return sum(self.writer_rate(p) * s_pool for p in range(self.pools))


@dataclass(frozen=True)
class IoMetrics:
    wall_clock_s: float
    client_wait_s: float        # mean blocked seconds per client
    client_wait_pct: float
    server_write_rate: float    # MiB/s over total server busy time
    bytes_written: int


@dataclass
class _StageOneResult:
    waits: List[float]              # per client
    busy_s: float                   # server busy seconds
    last_done: float                # completion of the last chunk
    arrivals: List[Tuple[float, float]]  # (completion, bytes) in FIFO order


def _simulate_stage_one(chunks: Sequence[Tuple[float, float]], n_clients: int,
                        rate: float, cap: float, compute_rate: float,
                        run_hours: float,
                        collect_arrivals: bool) -> _StageOneResult:
    """One server draining n identical clients.

    `chunks` is the per-client emission list of (model_hour, bytes).  At
    equal times clients act in id order, each pushing as many chunks as
    fit before yielding.
    """
    waits = [0.0] * n_clients
    if not chunks:
        return _StageOneResult(waits=waits, busy_s=0.0, last_done=0.0,
                               arrivals=[])
    n_chunks = len(chunks)
    ptr = [0] * n_clients
    fill = [0.0] * n_clients
    pending: List[deque] = [deque() for _ in range(n_clients)]
    arrivals: List[Tuple[float, float]] = []
    srv_free = 0.0
    busy = 0.0
    first_t = chunks[0][0] * compute_rate
    heap = [(first_t, c) for c in range(n_clients)]
    # already sorted by client id; heapify is a no-op ordering-wise
    while heap:
        t, c = heapq.heappop(heap)
        pend = pending[c]
        f = fill[c]
        while pend and pend[0][0] <= t:
            f -= pend.popleft()[1]
        k = ptr[c]
        hour = chunks[k][0]
        blocked = False
        while k < n_chunks:
            nxt_hour, share = chunks[k]
            if nxt_hour != hour:
                break
            if f + share <= cap + _EPS:
                start = srv_free if srv_free > t else t
                dur = share / rate
                done = start + dur
                srv_free = done
                busy += dur
                pend.append((done, share))
                if collect_arrivals:
                    arrivals.append((done, share))
                f += share
                k += 1
            else:
                # blocked: resume when enough of our queued chunks drain
                freed = 0.0
                resume = t
                for done, b in pend:
                    freed += b
                    resume = done
                    if f - freed + share <= cap + _EPS:
                        break
                waits[c] += resume - t
                heapq.heappush(heap, (resume, c))
                blocked = True
                break
        fill[c] = f
        ptr[c] = k
        if blocked:
            continue
        if k < n_chunks:
            heapq.heappush(heap, (t + (chunks[k][0] - hour) * compute_rate, c))
    return _StageOneResult(waits=waits, busy_s=busy, last_done=srv_free,
                           arrivals=arrivals)


def _stage_two(arrival_streams: Sequence[Sequence[Tuple[float, float]]],
               n_writers: int, rate: float,
               track_staging: bool) -> Tuple[float, float, float]:
    """Forwarded chunks from each level-1 stream are written by the
    pool's level-2 servers, round-robin per stream.  Returns (busy_s,
    last_done, peak_staging_bytes)."""
    merged = heapq.merge(*[
        ((t, l1, seq, b) for seq, (t, b) in enumerate(stream))
        for l1, stream in enumerate(arrival_streams)])
    free = [0.0] * n_writers
    busy = 0.0
    staging_events: List[Tuple[float, float]] = []
    for t, _l1, seq, b in merged:
        w = seq % n_writers
        start = free[w] if free[w] > t else t
        dur = b / rate
        done = start + dur
        free[w] = done
        busy += dur
        if track_staging:
            staging_events.append((t, b))
            staging_events.append((done, -b))
    peak = 0.0
    if track_staging:
        staging_events.sort()
        level = 0.0
        for _t, delta in staging_events:
            level += delta
            if level > peak:
                peak = level
    return busy, max(free), peak


def simulate_io(scenario: IoScenario) -> IoMetrics:
    """Run the scenario to completion and report the key measures."""
    sched = scenario.schedule
    events = workload.emission_events(sched)
    total_bytes = workload.total_bytes(sched)
    share_of = 1.0 / scenario.clients
    chunks = [(ev.time_hours, ev.bytes * share_of) for ev in events]
    cap = float(scenario.buffer_bytes)
    if chunks:
        biggest = max(b for _t, b in chunks)
        if biggest > cap + _EPS:
            raise UnwritableFieldError(
                f"field share of {biggest:.0f} bytes exceeds the "
                f"{scenario.buffer_bytes}-byte client buffer")

    compute_s = sched.run_hours * scenario.compute_rate
    two_level = scenario.two_level
    n_gather = scenario.servers_level1 if two_level else scenario.writer_count

    # clients -> gather/write servers, round-robin by client id
    clients_per = [scenario.clients // n_gather
                   + (1 if s < scenario.clients % n_gather else 0)
                   for s in range(n_gather)]

    if two_level:
        stage1_rate = [scenario.gather_rate] * n_gather
    else:
        # single level: the assigned server also writes
        stage1_rate = [scenario.writer_rate(s % scenario.pools)
                       for s in range(n_gather)]

    # deduplicate identical stage-1 subsystems
    classes: Dict[Tuple[int, float], _StageOneResult] = {}
    multiplicity: Dict[Tuple[int, float], int] = {}
    server_class: List[Optional[Tuple[int, float]]] = []
    for s in range(n_gather):
        k = clients_per[s]
        if k == 0:
            server_class.append(None)
            continue
        key = (k, stage1_rate[s])
        multiplicity[key] = multiplicity.get(key, 0) + 1
        server_class.append(key)
    for key in multiplicity:
        k, rate = key
        classes[key] = _simulate_stage_one(
            chunks, k, rate, cap, scenario.compute_rate, sched.run_hours,
            collect_arrivals=two_level)

    wait_total = 0.0
    for key, res in classes.items():
        wait_total += multiplicity[key] * sum(res.waits)
    wait_mean = wait_total / scenario.clients

    last_client_end = compute_s + max(
        (max(res.waits) for res in classes.values()), default=0.0)

    if two_level:
        track = scenario.server_memory_bytes is not None
        writers_per_pool = scenario.servers_level2 // scenario.pools
        pool_of_l1: List[List[int]] = [[] for _ in range(scenario.pools)]
        for l1 in range(n_gather):
            pool_of_l1[l1 % scenario.pools].append(l1)
        busy_write = 0.0
        last_done = 0.0
        staging_total = 0.0
        pool_cache: Dict[tuple, Tuple[float, float, float]] = {}
        for p in range(scenario.pools):
            streams = []
            sig_parts = []
            for l1 in pool_of_l1[p]:
                key = server_class[l1]
                if key is None:
                    continue
                streams.append(classes[key].arrivals)
                sig_parts.append(key)
            rate = scenario.writer_rate(p)
            sig = (tuple(sig_parts), writers_per_pool, rate)
            if sig not in pool_cache:
                pool_cache[sig] = _stage_two(streams, writers_per_pool, rate,
                                             track)
            busy, done, peak = pool_cache[sig]
            busy_write += busy
            staging_total += peak
            if done > last_done:
                last_done = done
        if track and staging_total > scenario.server_memory_bytes:
            raise ServerMemoryError(
                f"peak server staging {staging_total / MIB:.1f} MiB exceeds "
                f"limit {scenario.server_memory_bytes / MIB:.1f} MiB")
    else:
        busy_write = 0.0
        last_done = 0.0
        for key, res in classes.items():
            busy_write += multiplicity[key] * res.busy_s
            if res.last_done > last_done:
                last_done = res.last_done

    wall = max(compute_s, last_client_end, last_done)
    active = compute_s + wait_mean
    wait_pct = 100.0 * wait_mean / active if active > 0 else 0.0
    rate_mib = (total_bytes / busy_write) / MIB if busy_write > 0 else 0.0
    return IoMetrics(wall_clock_s=wall, client_wait_s=wait_mean,
                     client_wait_pct=wait_pct, server_write_rate=rate_mib,
                     bytes_written=total_bytes)


def metrics_row(metrics: IoMetrics) -> Dict[str, object]:
    return {
        "wall_clock_s": metrics.wall_clock_s,
        "wait_pct": metrics.client_wait_pct,
        "write_rate_mib_s": metrics.server_write_rate,
        "bytes_written": metrics.bytes_written,
    }


def buffer_sweep(scenario: IoScenario,
                 buffer_sizes: Sequence[int]) -> List[Dict[str, object]]:
    """Client-wait sensitivity to the per-client buffer size."""
    sizes = list(buffer_sizes)
    if sizes != sorted(sizes) or any(s < 1 for s in sizes):
        raise IoConfigError("buffer sizes must be positive and ascending")
    rows = []
    for size in sizes:
        m = simulate_io(replace(scenario, buffer_bytes=size))
        rows.append({"buffer_bytes": size, **metrics_row(m)})
    return rows


def server_sweep(scenario: IoScenario,
                 server_counts: Sequence[int]) -> List[Dict[str, object]]:
    """Sensitivity to the number of writing servers."""
    rows = []
    for count in server_counts:
        if scenario.two_level:
            s = replace(scenario, servers_level2=count)
        else:
            s = replace(scenario, servers_level1=count, servers_level2=0)
        m = simulate_io(s)
        rows.append({"servers": count, **metrics_row(m)})
    return rows


def pool_sweep(scenario: IoScenario,
               pool_counts: Sequence[int]) -> List[Dict[str, object]]:
    """Sensitivity to pool count at a fixed total number of servers."""
    writers = scenario.writer_count
    for count in pool_counts:
        if writers % count:
            raise IoConfigError(
                f"pool count {count} does not divide the {writers} "
                f"writing servers")
    rows = []
    for count in pool_counts:
        m = simulate_io(replace(scenario, pools=count))
        rows.append({"pools": count, **metrics_row(m)})
    return rows


def striping_compare(scenario: IoScenario):
    """Metrics with striping off (factor forced to 1) and on."""
    off = simulate_io(replace(scenario, striping_factor=1.0))
    on = simulate_io(scenario)
    summary = {
        "write_rate_ratio": (on.server_write_rate / off.server_write_rate
                             if off.server_write_rate else float("inf")),
        "wall_ratio": (off.wall_clock_s / on.wall_clock_s
                       if on.wall_clock_s else float("inf")),
        "wait_pct_off": off.client_wait_pct,
        "wait_pct_on": on.client_wait_pct,
    }
    return off, on, summary
