"""Command line driver.

Three subcommands:

    run     one scenario -> breakdown or I/O metrics CSV plus summary.txt
    sweep   one scenario axis -> one CSV row per axis value
    report  combine previously written CSVs (2 -> ratio, 3+ -> mean/std)

Exit status: 0 on success, 2 for configuration problems, 3 for
simulation failures (memory guard, unwritable field, server overflow).
Output files are written atomically (temp file then rename).
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import statistics
import sys
import tempfile
from pathlib import Path
from typing import Dict, List, Sequence

from . import dyncore, iosim
from .config import ConfigError, Scenario, load_scenario
from .mesh import build_mesh

DYNCORE_COLUMNS = ["panel_size", "nodes", "ranks", "threads",
                   "user_s", "p2p_s", "coll_s", "etc_s", "total_s"]
IO_COLUMNS = ["wall_clock_s", "wait_pct", "write_rate_mib_s", "bytes_written"]


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _format_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def write_csv(path: Path, rows: Sequence[Dict[str, object]],
              columns: Sequence[str]) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_format_cell(row[c]) for c in columns))
    _write_atomic(path, "\n".join(lines) + "\n")


def read_csv(path: Path) -> List[Dict[str, object]]:
    rows = []
    with open(path, newline="") as handle:
        for raw in csv.DictReader(handle):
            row: Dict[str, object] = {}
            for key, value in raw.items():
                try:
                    num = float(value)
                    row[key] = int(num) if num.is_integer() and "." not in value \
                        else num
                except ValueError:
                    row[key] = value
            rows.append(row)
    return rows


def _bar(value: float, scale: float, width: int = 40) -> str:
    filled = 0 if scale <= 0 else round(width * value / scale)
    return "#" * min(width, filled)


def _breakdown_summary(row: Dict[str, object]) -> str:
    parts = [("user", row["user_s"]), ("mpi p2p", row["p2p_s"]),
             ("mpi coll", row["coll_s"]), ("etc", row["etc_s"])]
    total = row["total_s"]
    lines = [f"timestep breakdown, {row['ranks']} ranks x "
             f"{row['threads']} threads on {row['nodes']} nodes "
             f"(panel size {row['panel_size']})", ""]
    for name, value in parts:
        pct = 100.0 * value / total if total else 0.0
        lines.append(f"  {name:<8} {value:10.6f} s {pct:5.1f}%  "
                     f"{_bar(value, total)}")
    lines.append(f"  {'total':<8} {total:10.6f} s")
    return "\n".join(lines) + "\n"


def _io_summary(row: Dict[str, object]) -> str:
    lines = ["diagnostic output simulation", ""]
    lines.append(f"  wall clock      {row['wall_clock_s']:14.3f} s")
    lines.append(f"  client wait     {row['wait_pct']:14.3f} %")
    lines.append(f"  write rate      {row['write_rate_mib_s']:14.3f} MiB/s")
    lines.append(f"  bytes written   {row['bytes_written']:14d}")
    return "\n".join(lines) + "\n"


def _repeat_rows(rows_fn, repeat: int) -> List[List[Dict[str, object]]]:
    return [rows_fn() for _ in range(repeat)]


def _stats_rows(samples: List[List[Dict[str, object]]],
                columns: Sequence[str]) -> List[Dict[str, object]]:
    """Per-cell mean and standard deviation across repeated tables."""
    out = []
    for row_idx in range(len(samples[0])):
        row: Dict[str, object] = {}
        for col in columns:
            values = [s[row_idx][col] for s in samples]
            if all(isinstance(v, (int, float)) for v in values):
                row[f"{col}_mean"] = statistics.fmean(values)
                row[f"{col}_std"] = (statistics.pstdev(values)
                                     if len(values) > 1 else 0.0)
            else:
                row[col] = values[0]
        out.append(row)
    return out


def _dyncore_rows(scenario: Scenario) -> List[Dict[str, object]]:
    if scenario.grid is not None:
        rows = []
        for point in scenario.grid.points:
            mesh = build_mesh(point["panel_size"],
                              point.get("levels",
                                        scenario.mesh.levels
                                        if scenario.mesh else 120))
            threads = scenario.grid.threads or \
                [scenario.layout["threads_per_rank"]]
            for t in threads:
                run = scenario.run_spec(mesh=mesh, nodes=point["nodes"],
                                        threads=t)
                rows.append(dyncore.breakdown_row(run, dyncore.simulate(run)))
        return rows
    run = scenario.run_spec()
    return [dyncore.breakdown_row(run, dyncore.simulate(run))]


def cmd_run(args) -> int:
    scenario = load_scenario(args.config)
    out = Path(args.out)
    if scenario.io_scenario is not None:
        rows_fn = lambda: [iosim.metrics_row(
            iosim.simulate_io(scenario.io_scenario))]
        columns = IO_COLUMNS
        csv_name, stats_name = "io.csv", "io_stats.csv"
        summary = _io_summary
    else:
        rows_fn = lambda: _dyncore_rows(scenario)
        columns = DYNCORE_COLUMNS
        csv_name, stats_name = "dyncore.csv", "dyncore_stats.csv"
        summary = _breakdown_summary
    samples = _repeat_rows(rows_fn, max(1, args.repeat))
    write_csv(out / csv_name, samples[0], columns)
    if args.repeat > 1:
        stats = _stats_rows(samples, columns)
        write_csv(out / stats_name, stats, list(stats[0]))
    _write_atomic(out / "summary.txt", summary(samples[0][0]))
    print(f"wrote {out / csv_name}")
    return 0


_IO_AXES = {"buffer_bytes", "servers", "pools"}


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.config)
    axis = args.axis
    if axis not in scenario.sweep:
        raise ConfigError(f"sweep axis {axis!r} not in config "
                          f"(available: {sorted(scenario.sweep) or 'none'})")
    values = scenario.sweep[axis]
    if axis in _IO_AXES:
        if scenario.io_scenario is None:
            raise ConfigError(f"sweep axis {axis!r} needs an io_scenario "
                              "section")
        sweep_fn = {"buffer_bytes": iosim.buffer_sweep,
                    "servers": iosim.server_sweep,
                    "pools": iosim.pool_sweep}[axis]
        rows = sweep_fn(scenario.io_scenario, [int(v) for v in values])
        columns = [axis] + IO_COLUMNS
    elif axis == "threads":
        run = scenario.run_spec()
        rows = dyncore.thread_sweep(run.mesh, run.machine, run.nodes,
                                    [int(v) for v in values],
                                    cost=run.cost_model, memory=run.memory)
        columns = DYNCORE_COLUMNS + ["best"]
    elif axis == "nodes":
        run = scenario.run_spec()
        rows = dyncore.strong_scaling_study(
            run.mesh, run.machine, [int(v) for v in values],
            run.ranks_per_node, run.threads_per_rank,
            cost=run.cost_model, memory=run.memory)
        columns = DYNCORE_COLUMNS + ["ideal_s"]
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    out = Path(args.out)
    write_csv(out / f"sweep_{axis}.csv", rows, columns)
    print(f"wrote {out / f'sweep_{axis}.csv'}")
    return 0


def cmd_report(args) -> int:
    tables = [read_csv(Path(p)) for p in args.inputs]
    out = Path(args.out)
    if len(tables) < 2:
        raise ConfigError("report needs at least two input CSVs")
    if len(tables) == 2:
        rows = dyncore.ratio_report(tables[0], tables[1])
        name = "ratio.csv"
    else:
        columns = list(tables[0][0])
        rows = _stats_rows(tables, columns)
        name = "stats.csv"
    write_csv(out / name, rows, list(rows[0]))
    print(f"wrote {out / name}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cubedsim",
        description="performance model for a cubed-sphere dynamical core "
                    "and its diagnostic output servers")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one scenario")
    run.add_argument("--config", required=True, help="scenario JSON file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--repeat", type=int, default=1,
                     help="repetitions; >1 adds a mean/std table")
    run.add_argument("--seed", type=int, default=0,
                     help="reserved for stochastic extensions")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="sweep one axis of a scenario")
    sweep.add_argument("--config", required=True, help="scenario JSON file")
    sweep.add_argument("--axis", required=True,
                       help="threads, nodes, buffer_bytes, servers or pools")
    sweep.add_argument("--out", required=True, help="output directory")
    sweep.add_argument("--seed", type=int, default=0,
                       help="reserved for stochastic extensions")
    sweep.set_defaults(func=cmd_sweep)

    report = sub.add_parser("report", help="combine result CSVs")
    report.add_argument("inputs", nargs="+", help="CSV files to combine")
    report.add_argument("--out", required=True, help="output directory")
    report.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, dyncore.TableMismatchError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (dyncore.SimulationError, iosim.IoConfigError,
            iosim.ServerMemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
