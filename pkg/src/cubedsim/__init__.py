"""Desk-scale performance model of a cubed-sphere dynamical core and its
parallel diagnostic output servers."""

from .mesh import CubedSphereMesh, MeshError, build_mesh
from .decomp import (Decomposition, HaloDepthError, Mode, compute_halos,
                     exchange_pattern, local_area, partition)
from .machine import (CostModel, LayoutError, MachineConfig, MemoryModel,
                      builtin_machine, builtin_machines, default_cost_model,
                      validate_layout)
from .workload import (DiagnosticSchedule, ScheduleEntry, c192_schedule,
                       emission_events, make_schedule, total_bytes,
                       total_fields)
from .dyncore import (MemoryLimitError, RunSpec, SimulationError,
                      TimestepBreakdown, ratio_report, simulate,
                      strong_scaling_study, thread_sweep)
from .iosim import (IoMetrics, IoScenario, IoConfigError, ServerMemoryError,
                    UnwritableFieldError, buffer_sweep, pool_sweep,
                    server_sweep, simulate_io, striping_compare)
from .config import ConfigError, Scenario, load_scenario, parse_scenario

__version__ = "1.0.0"

__all__ = [
    "CubedSphereMesh", "MeshError", "build_mesh",
    "Decomposition", "HaloDepthError", "Mode", "compute_halos",
    "exchange_pattern", "local_area", "partition",
    "CostModel", "LayoutError", "MachineConfig", "MemoryModel",
    "builtin_machine", "builtin_machines", "default_cost_model",
    "validate_layout",
    "DiagnosticSchedule", "ScheduleEntry", "c192_schedule",
    "emission_events", "make_schedule", "total_bytes", "total_fields",
    "MemoryLimitError", "RunSpec", "SimulationError", "TimestepBreakdown",
    "ratio_report", "simulate", "strong_scaling_study", "thread_sweep",
    "IoMetrics", "IoScenario", "IoConfigError", "ServerMemoryError",
    "UnwritableFieldError", "buffer_sweep", "pool_sweep", "server_sweep",
    "simulate_io", "striping_compare",
    "ConfigError", "Scenario", "load_scenario", "parse_scenario",
]
