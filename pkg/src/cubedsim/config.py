"""Scenario configuration files.

A scenario is a single JSON document with optional sections:

    machine      builtin name or full custom description
    cost_model   cost-coefficient overrides
    memory       memory-guard overrides
    mesh         {"panel_size": N, "levels": L}
    layout       {"nodes", "ranks_per_node", "threads_per_rank", ...}
    grid         {"points": [{"panel_size", "nodes", ...}], "threads": [...]}
    schedule     {"run_hours", "entries": [{"field_count", ...}]}
    io_scenario  client/server/buffer configuration
    sweep        axis value lists for the sweep command

Unknown keys are rejected with their location.  parse -> serialize ->
parse round-trips to an identical scenario.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path
from typing import Any, Dict, List, Optional

from .dyncore import RunSpec
from .decomp import Mode
from .iosim import IoScenario
from .machine import (CostModel, MachineConfig, MemoryModel, builtin_machine,
                      default_cost_model)
from .mesh import CubedSphereMesh, build_mesh
from .workload import DiagnosticSchedule, make_schedule


class ConfigError(ValueError):
    """Invalid configuration; the message carries the offending location."""


def _require(mapping: Dict[str, Any], where: str, required: List[str],
             optional: List[str]) -> None:
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where}: expected an object")
    for key in mapping:
        if key not in required and key not in optional:
            raise ConfigError(f"{where}.{key}: unknown key")
    for key in required:
        if key not in mapping:
            raise ConfigError(f"{where}.{key}: missing required key")


def _number(mapping: Dict[str, Any], where: str, key: str, kind=float):
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {value!r}")
    if kind is int and int(value) != value:
        raise ConfigError(f"{where}.{key}: expected an integer, got {value!r}")
    return kind(value)


@dataclass
class GridSpec:
    points: List[Dict[str, int]]
    threads: List[int]


@dataclass
class Scenario:
    """Parsed and validated configuration bundle."""

    machine: Optional[MachineConfig] = None
    cost_overrides: Dict[str, Any] = field(default_factory=dict)
    memory: Optional[MemoryModel] = None
    mesh: Optional[CubedSphereMesh] = None
    layout: Optional[Dict[str, Any]] = None
    grid: Optional[GridSpec] = None
    schedule: Optional[DiagnosticSchedule] = None
    io_scenario: Optional[IoScenario] = None
    sweep: Dict[str, List[Any]] = field(default_factory=dict)

    def cost_model(self) -> CostModel:
        base = default_cost_model(self.machine)
        if not self.cost_overrides:
            return base
        values = {f.name: getattr(base, f.name) for f in dc_fields(CostModel)}
        values.update(self.cost_overrides)
        return CostModel(**values)

    def run_spec(self, mesh: Optional[CubedSphereMesh] = None,
                 nodes: Optional[int] = None,
                 threads: Optional[int] = None) -> RunSpec:
        if self.machine is None or self.layout is None:
            raise ConfigError("machine and layout sections are required "
                              "for a timestep run")
        mesh = mesh if mesh is not None else self.mesh
        if mesh is None:
            raise ConfigError("mesh section is required for a timestep run")
        lay = dict(self.layout)
        if nodes is not None:
            lay["nodes"] = nodes
        if threads is not None:
            lay["threads_per_rank"] = threads
            lay["ranks_per_node"] = self.machine.cores_per_node // threads
        kwargs = dict(mesh=mesh, machine=self.machine, cost=self.cost_model(),
                      nodes=lay["nodes"], ranks_per_node=lay["ranks_per_node"],
                      threads_per_rank=lay["threads_per_rank"])
        for key in ("timesteps", "halo_depth", "bytes_per_cell"):
            if key in lay:
                kwargs[key] = lay[key]
        if "mode" in lay:
            kwargs["mode"] = Mode(lay["mode"])
        if self.memory is not None:
            kwargs["memory"] = self.memory
        return RunSpec(**kwargs)


_MACHINE_KEYS = ["name", "cores_per_node", "cpus_per_node", "clock_ghz",
                 "numa_domains_per_cpu", "l3_mb_per_cpu", "interconnect",
                 "max_nodes"]
_COST_KEYS = ["c_cell", "p2p_alpha", "p2p_beta", "coll_alpha", "coll_beta",
              "barrier_cost", "etc_fixed", "parallel_regions_per_step",
              "allreduces_per_step", "halo_exchanges_per_step", "reduce_bytes",
              "thread_efficiency"]
_MEMORY_KEYS = ["node_memory_bytes", "words_per_cell_level",
                "rank_table_bytes_per_rank", "fixed_rank_bytes"]
_LAYOUT_KEYS = ["nodes", "ranks_per_node", "threads_per_rank", "timesteps",
                "mode", "halo_depth", "bytes_per_cell"]
_IO_KEYS = ["clients", "servers_level1", "servers_level2", "pools",
            "buffer_bytes", "base_write_rate", "striping_factor", "files",
            "compute_rate", "gather_rate_factor", "pool_penalty",
            "stripe_cap", "server_memory_bytes"]
_SWEEP_KEYS = ["threads", "nodes", "buffer_bytes", "servers", "pools"]


def _parse_machine(section: Any, where: str) -> MachineConfig:
    if isinstance(section, dict) and list(section) == ["builtin"]:
        try:
            return builtin_machine(section["builtin"])
        except ValueError as exc:
            raise ConfigError(f"{where}.builtin: {exc}") from exc
    _require(section, where, _MACHINE_KEYS, [])
    try:
        return MachineConfig(
            name=str(section["name"]),
            cores_per_node=_number(section, where, "cores_per_node", int),
            cpus_per_node=_number(section, where, "cpus_per_node", int),
            clock_ghz=_number(section, where, "clock_ghz"),
            numa_domains_per_cpu=_number(section, where,
                                         "numa_domains_per_cpu", int),
            l3_mb_per_cpu=_number(section, where, "l3_mb_per_cpu"),
            interconnect=str(section["interconnect"]),
            max_nodes=_number(section, where, "max_nodes", int))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_schedule(section: Any, where: str) -> DiagnosticSchedule:
    _require(section, where, ["run_hours", "entries"], [])
    entries = section["entries"]
    if not isinstance(entries, list):
        raise ConfigError(f"{where}.entries: expected a list")
    parsed = []
    for idx, entry in enumerate(entries):
        ew = f"{where}.entries[{idx}]"
        _require(entry, ew, ["field_count", "period_hours", "bytes_per_field"], [])
        parsed.append((_number(entry, ew, "field_count", int),
                       _number(entry, ew, "period_hours"),
                       _number(entry, ew, "bytes_per_field", int)))
    try:
        return make_schedule(parsed, _number(section, where, "run_hours"))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_scenario(doc: Dict[str, Any], source: str = "config") -> Scenario:
    _require(doc, source, [],
             ["machine", "cost_model", "memory", "mesh", "layout", "grid",
              "schedule", "io_scenario", "sweep"])
    scenario = Scenario()

    if "machine" in doc:
        scenario.machine = _parse_machine(doc["machine"], f"{source}.machine")

    if "cost_model" in doc:
        section = doc["cost_model"]
        _require(section, f"{source}.cost_model", [], _COST_KEYS)
        overrides = dict(section)
        if "thread_efficiency" in overrides:
            eff = overrides["thread_efficiency"]
            if not isinstance(eff, dict):
                raise ConfigError(f"{source}.cost_model.thread_efficiency: "
                                  "expected an object")
            overrides["thread_efficiency"] = {int(k): float(v)
                                              for k, v in eff.items()}
        scenario.cost_overrides = overrides

    if "memory" in doc:
        section = doc["memory"]
        _require(section, f"{source}.memory", [], _MEMORY_KEYS)
        scenario.memory = MemoryModel(**{k: int(v) for k, v in section.items()})

    if "mesh" in doc:
        section = doc["mesh"]
        _require(section, f"{source}.mesh", ["panel_size", "levels"], [])
        try:
            scenario.mesh = build_mesh(
                _number(section, f"{source}.mesh", "panel_size", int),
                _number(section, f"{source}.mesh", "levels", int))
        except ValueError as exc:
            raise ConfigError(f"{source}.mesh: {exc}") from exc

    if "layout" in doc:
        section = doc["layout"]
        _require(section, f"{source}.layout",
                 ["nodes", "ranks_per_node", "threads_per_rank"],
                 [k for k in _LAYOUT_KEYS
                  if k not in ("nodes", "ranks_per_node", "threads_per_rank")])
        if "mode" in section and section["mode"] not in \
                [m.value for m in Mode]:
            raise ConfigError(f"{source}.layout.mode: unknown mode "
                              f"{section['mode']!r}")
        scenario.layout = dict(section)

    if "grid" in doc:
        section = doc["grid"]
        _require(section, f"{source}.grid", ["points"], ["threads"])
        points = []
        for idx, pt in enumerate(section["points"]):
            pw = f"{source}.grid.points[{idx}]"
            _require(pt, pw, ["panel_size", "nodes"], ["levels"])
            points.append({k: _number(pt, pw, k, int) for k in pt})
        threads = [int(t) for t in section.get("threads", [])]
        scenario.grid = GridSpec(points=points, threads=threads)

    if "schedule" in doc:
        scenario.schedule = _parse_schedule(doc["schedule"],
                                            f"{source}.schedule")

    if "io_scenario" in doc:
        section = doc["io_scenario"]
        required = ["clients", "servers_level1", "servers_level2", "pools",
                    "buffer_bytes", "base_write_rate", "striping_factor",
                    "files", "compute_rate"]
        _require(section, f"{source}.io_scenario", required,
                 [k for k in _IO_KEYS if k not in required])
        if scenario.schedule is None:
            raise ConfigError(f"{source}.io_scenario: requires a schedule "
                              "section")
        kwargs = dict(section)
        try:
            scenario.io_scenario = IoScenario(schedule=scenario.schedule,
                                              **kwargs)
        except ValueError as exc:
            raise ConfigError(f"{source}.io_scenario: {exc}") from exc

    if "sweep" in doc:
        section = doc["sweep"]
        _require(section, f"{source}.sweep", [], _SWEEP_KEYS)
        for axis, values in section.items():
            if not isinstance(values, list) or not values:
                raise ConfigError(f"{source}.sweep.{axis}: expected a "
                                  "non-empty list")
        scenario.sweep = {axis: list(values)
                         for axis, values in section.items()}

    return scenario


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    return parse_scenario(doc, source=path.name)


def canonical_dict(scenario: Scenario) -> Dict[str, Any]:
    """Canonical plain-dict form; parse(canonical_dict(s)) == s."""
    doc: Dict[str, Any] = {}
    if scenario.machine is not None:
        m = scenario.machine
        doc["machine"] = {k: getattr(m, k) for k in _MACHINE_KEYS}
    if scenario.cost_overrides:
        overrides = dict(scenario.cost_overrides)
        if "thread_efficiency" in overrides:
            overrides["thread_efficiency"] = {
                str(k): v for k, v in overrides["thread_efficiency"].items()}
        doc["cost_model"] = overrides
    if scenario.memory is not None:
        doc["memory"] = {k: getattr(scenario.memory, k) for k in _MEMORY_KEYS}
    if scenario.mesh is not None:
        doc["mesh"] = {"panel_size": scenario.mesh.panel_size,
                       "levels": scenario.mesh.levels}
    if scenario.layout is not None:
        doc["layout"] = dict(scenario.layout)
    if scenario.grid is not None:
        doc["grid"] = {"points": scenario.grid.points,
                       "threads": scenario.grid.threads}
    if scenario.schedule is not None:
        doc["schedule"] = {
            "run_hours": scenario.schedule.run_hours,
            "entries": [{"field_count": e.field_count,
                         "period_hours": e.period_hours,
                         "bytes_per_field": e.bytes_per_field}
                        for e in scenario.schedule.entries]}
    if scenario.io_scenario is not None:
        io = scenario.io_scenario
        doc["io_scenario"] = {k: getattr(io, k) for k in _IO_KEYS
                              if getattr(io, k) is not None}
    if scenario.sweep:
        doc["sweep"] = {k: list(v) for k, v in scenario.sweep.items()}
    return doc


def dump_scenario(scenario: Scenario) -> str:
    return json.dumps(canonical_dict(scenario), indent=2, sort_keys=True) + "\n"
