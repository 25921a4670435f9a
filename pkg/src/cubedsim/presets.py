"""Shipped scenario fixtures with frozen calibration values.

These are the configurations behind the example config files and the
regression tests.  Every number here is a calibration chosen so the
simulated trends land in the right regime at desk scale; none is a
hardware measurement.
"""

from __future__ import annotations

from dataclasses import replace

from .iosim import IoScenario
from .workload import DiagnosticSchedule, c192_schedule, make_schedule

MIB = 1024 * 1024


def c896_schedule() -> DiagnosticSchedule:
    """Enhanced hourly diagnostic load, 1.1 TiB over 48 model hours."""
    return make_schedule([(120, 1.0, 209_976_873)], 48.0)


def c192_baseline_scenario() -> IoScenario:
    """Heavy diagnostic load on a wide flat server layout: 864 clients
    feeding 72 single-level servers writing about 30 files."""
    return IoScenario(
        clients=864,
        servers_level1=72,
        servers_level2=0,
        pools=1,
        buffer_bytes=4_000_000,
        base_write_rate=100.0 * MIB,
        striping_factor=1.0,
        files=30,
        schedule=c192_schedule(),
        compute_rate=20.0,
    )


def c192_tuned_scenario() -> IoScenario:
    """Same load and resource, retuned: 16 servers total, 8 gathering
    and 8 writing, in 4 pools of 2 writers each."""
    return replace(c192_baseline_scenario(),
                   servers_level1=8, servers_level2=8, pools=4)


def c896_scenario(striping: bool = True) -> IoScenario:
    """High-resolution hourly-diagnostics run, write-rate bound without
    striping.  The striping factor matches the observed on/off write
    bandwidth ratio."""
    return IoScenario(
        clients=4704,
        servers_level1=392,
        servers_level2=0,
        pools=1,
        buffer_bytes=5_200_000,
        base_write_rate=0.57 * MIB,
        striping_factor=2.53 if striping else 1.0,
        files=480,
        schedule=c896_schedule(),
        compute_rate=100.0,
        pool_penalty=0.0,
    )


def iodev_scenario() -> IoScenario:
    """Small standalone I/O test rig for buffer and server sweeps."""
    return IoScenario(
        clients=8,
        servers_level1=2,
        servers_level2=0,
        pools=1,
        buffer_bytes=2 * MIB,
        base_write_rate=2.0 * MIB,
        striping_factor=1.0,
        files=16,
        schedule=make_schedule([(16, 1.0, 8 * MIB)], 24.0),
        compute_rate=60.0,
        pool_penalty=0.0,
    )
