"""
Command-line interface: ``numpart``, ``graphpart`` and ``sweepk``.

Every command resolves its configuration (flags over the chosen budget preset
over the solver defaults of ``config.json``), runs the annealer and emits a
``RunReport`` as JSON (canonical) or CSV.

Exit codes: 0 success, 1 usage/input/output error, 2 ``--expect-optimal`` not
met, 3 infeasible partition.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, TextIO

import pandas as pd

from qubo_annealer import __version__
from qubo_annealer.annealer import AnnealResult, anneal, default_offset_increment
from qubo_annealer.graph_io import (
    BUILTIN_DATASETS,
    Graph,
    graph_stats,
    load_builtin,
    load_edge_list,
    load_electrical_lines,
)
from qubo_annealer.models.params import AnnealParams, ScheduleRequest
from qubo_annealer.models.reports import (
    BoundaryReport,
    GraphSummary,
    InfeasibleBlocks,
    NumberPartitionReport,
    PartitionRow,
    RunConfig,
    RunReport,
    SolverInfo,
    Timing,
)
from qubo_annealer.problems.graph_partition import (
    InfeasibleDecode,
    PartitionProblem,
    boundary_weight_stats,
    build_graph_partition,
    decode_partition,
    empty_groups,
    group_sizes,
    modularity,
)
from qubo_annealer.problems.number_partition import (
    build_number_partition,
    decode_number_partition,
    generate_number_set,
    karmarkar_karp,
    read_number_set,
)
from qubo_annealer.qubo_core import QuboModel
from qubo_annealer.solver_config import SolverConfig, configure_logging, load_config

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_EXPECTATION = 2
EXIT_INFEASIBLE = 3

CSV_COLUMNS = {
    "numpart": ["n", "total", "sum_a", "sum_b", "d", "energy", "karmarkar_karp_d", "seconds"],
    "graph": ["k", "modularity", "best_energy", "feasible", "seconds"],
}


class _ArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common_options() -> argparse.ArgumentParser:
    parent = _ArgumentParser(add_help=False)
    parent.add_argument("--preset", default="quick", help="budget preset from config.json (quick, paper)")
    parent.add_argument("--restarts", type=int, help="independent runs (overrides the preset)")
    parent.add_argument("--steps", type=int, help="Monte Carlo steps per run (overrides the preset)")
    parent.add_argument("--t-start", type=float, help="initial temperature (derived from the model when unset)")
    parent.add_argument("--t-end", type=float, help="final temperature (derived from the model when unset)")
    parent.add_argument("--seed", type=int, help="root RNG seed")
    parent.add_argument("--offset-inc", type=float, help="escape offset increment")
    parent.add_argument("--time-limit-sec", type=float, help="wall-clock cap per solve")
    parent.add_argument("--initial-state", choices=["shared", "random"], help="initial state policy")
    parent.add_argument("--baseline-sa", action="store_true", help="use the sequential SA engine")
    parent.add_argument("--workers", type=int, help="worker processes for restarts")
    parent.add_argument("--trace-every", type=int, help="record a trace sample every N steps")
    parent.add_argument("--format", choices=["json", "csv"], help="report format")
    parent.add_argument("--out", help="report destination (stdout when unset)")
    parent.add_argument("--config", help="path to config.json")
    parent.add_argument("--log-level", choices=["debug", "info", "warning", "error", "critical"])
    return parent


def _graph_options() -> argparse.ArgumentParser:
    parent = _ArgumentParser(add_help=False)
    source = parent.add_mutually_exclusive_group(required=True)
    source.add_argument("--edges", help="edge list file: 'u v [w]' per line")
    source.add_argument("--electrical", help="line table CSV: from_bus,to_bus,r_ohm,x_ohm")
    source.add_argument("--builtin", choices=sorted(BUILTIN_DATASETS), help="bundled dataset")
    parent.add_argument("--gamma", type=float, default=1.0, help="modularity resolution (default 1.0)")
    parent.add_argument("--onehot", choices=["moves", "penalty"], help="one-hot handling")
    parent.add_argument("--lambda", dest="lam", type=float, default=1.0, help="non-empty group weight (default 1.0)")
    parent.add_argument("--one-hot-penalty", type=float, help="penalty-mode weight A (default 2 max_i sum_j |B_ij|)")
    return parent


def build_parser() -> argparse.ArgumentParser:
    """Top-level parser with the three subcommands."""
    parser = _ArgumentParser(prog="qubo-anneal", description="Parallel-trial annealing for QUBO partitioning problems")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)
    common, graph = _common_options(), _graph_options()

    numpart = commands.add_parser("numpart", parents=[common], help="two-way number partitioning")
    numpart.add_argument("input", nargs="?", help="file with one positive integer per line")
    numpart.add_argument("--generate", type=int, help="generate N uniform integers instead of reading a file")
    numpart.add_argument("--max-value", type=int, default=10000, help="largest generated value (default 10000)")
    numpart.add_argument("--expect-optimal", action="store_true", help="exit 2 unless D <= 1")

    graphpart = commands.add_parser("graphpart", parents=[common, graph], help="modularity partition for one K")
    graphpart.add_argument("--k", type=int, required=True, help="group count")

    sweep = commands.add_parser("sweepk", parents=[common, graph], help="modularity partition for a range of K")
    sweep.add_argument("--k-min", type=int, required=True, help="smallest group count")
    sweep.add_argument("--k-max", type=int, required=True, help="largest group count")
    return parser


def _source_label(args: argparse.Namespace) -> Optional[str]:
    if getattr(args, "builtin", None):
        return f"builtin:{args.builtin}"
    for name in ("edges", "electrical", "input"):
        value = getattr(args, name, None)
        if value:
            return str(value)
    return "generated" if getattr(args, "generate", None) else None


def resolve_run_config(args: argparse.Namespace, solver_config: SolverConfig, units: int) -> RunConfig:
    """
    Merge flags, the chosen preset and solver defaults into a ``RunConfig``.

    ``units`` is the problem size the preset's sweeps are counted in (values or nodes).

    Raises:
        KeyError: unknown preset.
        pydantic.ValidationError: the merged values violate a constraint.
    """
    preset = solver_config.preset(args.command, args.preset)
    solver = solver_config.solver
    engine = "sequential-sa" if args.baseline_sa else solver["engine"]
    onehot = getattr(args, "onehot", None) or ("penalty" if engine == "sequential-sa" else solver["onehot"])
    steps = args.steps if args.steps is not None else max(1, math.ceil(float(preset["sweeps"]) * max(units, 1)))
    values: dict[str, Any] = {
        "command": args.command,
        "source": _source_label(args),
        "restarts": args.restarts if args.restarts is not None else preset["restarts"],
        "steps": steps,
        "t_start": args.t_start,
        "t_end": args.t_end,
        "schedule_kind": solver["schedule_kind"],
        "seed": args.seed if args.seed is not None else solver["seed"],
        "engine": engine,
        "initial_state_mode": args.initial_state or solver["initial_state_mode"],
        "onehot": onehot,
        "offset_increment": args.offset_inc,
        "time_limit_sec": args.time_limit_sec if args.time_limit_sec is not None else preset.get("time_limit_sec"),
        "workers": args.workers if args.workers is not None else solver["workers"],
        "trace_every": args.trace_every,
        "preset": args.preset,
        "format": args.format or solver_config.report["format"],
        "out": args.out,
    }
    if args.command == "numpart":
        values.update(generate=args.generate, max_value=args.max_value, expect_optimal=args.expect_optimal)
    else:
        values.update(gamma=args.gamma, lam=args.lam, one_hot_penalty=args.one_hot_penalty)
        if args.command == "graphpart":
            values["k"] = args.k
        else:
            values.update(k_min=args.k_min, k_max=args.k_max)
    return RunConfig(**values)


def _schedule_request(config: RunConfig, solver_config: SolverConfig) -> ScheduleRequest:
    solver = solver_config.solver
    return ScheduleRequest(
        steps=config.steps,
        kind=config.schedule_kind,
        t_start=config.t_start,
        t_end=config.t_end,
        t_end_ratio=solver["t_end_ratio"],
        delta_samples=solver["delta_samples"],
    )


def _anneal_params(config: RunConfig, model: QuboModel, solver_config: SolverConfig) -> AnnealParams:
    increment = config.offset_increment
    if increment is None:
        increment = default_offset_increment(model, float(solver_config.solver["offset_increment_scale"]))
    return AnnealParams(
        restarts=config.restarts,
        seed=config.seed,
        initial_state_mode=config.initial_state_mode,
        offset_increment=increment,
        one_hot_mode=config.onehot,
        engine=config.engine,
        time_limit_sec=config.time_limit_sec,
        trace_every=config.trace_every,
        workers=config.workers,
    )


def _solver_info(config: RunConfig) -> SolverInfo:
    return SolverInfo(
        engine=config.engine,
        seed=config.seed,
        restarts=config.restarts,
        steps=config.steps,
        schedule_kind=config.schedule_kind,
        onehot=config.onehot,
        initial_state_mode=config.initial_state_mode,
    )


def _trace(result: AnnealResult) -> Optional[list[list[float]]]:
    trace = result.per_restart[result.best_restart].trace
    if not trace:
        return None
    return [[point.step, point.temperature, point.offset, point.current, point.best] for point in trace]


# ─────────────────────────── commands ───────────────────────────


def cmd_numpart(args: argparse.Namespace, solver_config: SolverConfig) -> tuple[RunReport, int]:
    """Partition a number set read from a file or generated from a seed."""
    started = time.perf_counter()
    if args.input and args.generate:
        raise ValueError("give either an input file or --generate, not both")
    if args.generate:
        seed = args.seed if args.seed is not None else int(solver_config.solver["seed"])
        numbers = generate_number_set(args.generate, args.max_value, seed)
    elif args.input:
        numbers = read_number_set(args.input)
    else:
        raise ValueError("numpart needs an input file or --generate")
    config = resolve_run_config(args, solver_config, units=len(numbers))

    model = build_number_partition(numbers)
    solve_started = time.perf_counter()
    result = anneal(model, None, _schedule_request(config, solver_config), _anneal_params(config, model, solver_config))
    solve_seconds = time.perf_counter() - solve_started
    decoded = decode_number_partition(numbers, result.best_bits)
    kk = karmarkar_karp(numbers)
    LOGGER.info("numpart n=%d: D=%d (Karmarkar-Karp %d) in %.2fs", len(numbers), decoded.d, kk, solve_seconds)

    report = RunReport(
        command="numpart",
        config=config,
        solver=_solver_info(config),
        number_partition=NumberPartitionReport(
            n=len(numbers),
            total=numbers.total,
            sum_a=decoded.sum_a,
            sum_b=decoded.sum_b,
            d=decoded.d,
            energy=result.best_total_energy,
            karmarkar_karp_d=kk,
            t_start=result.schedule.t_start,
            t_end=result.schedule.t_end,
            offset_increment=result.offset_increment,
            time_limit_reached=result.time_limit_reached,
            bits=[int(bit) for bit in result.best_bits],
            trace=_trace(result),
        ),
        timing=Timing(total_seconds=time.perf_counter() - started, solve_seconds={"numpart": solve_seconds}),
    )
    if config.expect_optimal and decoded.d > 1:
        LOGGER.warning("expected an optimal partition (D <= 1), got D=%d", decoded.d)
        return report, EXIT_EXPECTATION
    return report, EXIT_OK


def _load_graph(args: argparse.Namespace) -> Graph:
    if args.builtin:
        return load_builtin(args.builtin)
    if args.edges:
        return load_edge_list(args.edges)
    return load_electrical_lines(args.electrical)


def solve_partition(
    graph: Graph, k: int, config: RunConfig, solver_config: SolverConfig
) -> tuple[PartitionRow, float]:
    """Formulate, anneal and decode one group count; returns the row and its solve time."""
    started = time.perf_counter()
    problem = PartitionProblem(
        graph=graph, k=k, gamma=config.gamma, one_hot_penalty=config.one_hot_penalty, nonempty_lambda=config.lam
    )
    formulation = build_graph_partition(problem, mode=config.onehot)
    result = anneal(
        formulation.model,
        formulation.constraints,
        _schedule_request(config, solver_config),
        _anneal_params(config, formulation.model, solver_config),
        formulation.groups,
    )
    seconds = time.perf_counter() - started
    decoded = decode_partition(result.best_bits, graph.n, k)
    row = {
        "k": k,
        "best_energy": result.best_total_energy,
        "t_start": result.schedule.t_start,
        "t_end": result.schedule.t_end,
        "offset_increment": result.offset_increment,
        "time_limit_reached": result.time_limit_reached,
        "trace": _trace(result),
    }
    if isinstance(decoded, InfeasibleDecode):
        LOGGER.warning(
            "K=%d: infeasible state (%d zero-hot, %d multi-hot blocks)",
            k, len(decoded.zero_hot), len(decoded.multi_hot),
        )
        labels = graph.labels
        return (
            PartitionRow(
                feasible=False,
                infeasible=InfeasibleBlocks(
                    zero_hot=[str(labels[i]) for i in decoded.zero_hot],
                    multi_hot=[str(labels[i]) for i in decoded.multi_hot],
                ),
                **row,
            ),
            seconds,
        )
    stats = boundary_weight_stats(graph, decoded)
    value = modularity(graph, decoded, config.gamma)
    LOGGER.info("K=%d: modularity %.6f in %.2fs", k, value, seconds)
    return (
        PartitionRow(
            feasible=True,
            modularity=value,
            assignment={str(label): int(group) for label, group in zip(graph.labels, decoded.group_of)},
            group_sizes=group_sizes(decoded).tolist(),
            empty_groups=empty_groups(decoded),
            boundary=BoundaryReport(**asdict(stats)),
            **row,
        ),
        seconds,
    )


def _graph_report(
    command: str,
    graph: Graph,
    config: RunConfig,
    rows: list[PartitionRow],
    seconds: dict[str, float],
    started: float,
) -> RunReport:
    feasible = [row for row in rows if row.feasible]
    best_k = max(feasible, key=lambda row: (row.modularity, -row.k)).k if feasible else None
    return RunReport(
        command=command,
        config=config,
        solver=_solver_info(config),
        graph=GraphSummary(**graph_stats(graph)),
        partitions=rows,
        best_k=best_k,
        timing=Timing(total_seconds=time.perf_counter() - started, solve_seconds=seconds),
    )


def cmd_graphpart(args: argparse.Namespace, solver_config: SolverConfig) -> tuple[RunReport, int]:
    """Partition a graph into a fixed number of groups."""
    started = time.perf_counter()
    graph = _load_graph(args)
    config = resolve_run_config(args, solver_config, units=graph.n)
    row, seconds = solve_partition(graph, config.k, config, solver_config)
    report = _graph_report("graphpart", graph, config, [row], {str(config.k): seconds}, started)
    return report, EXIT_OK if row.feasible else EXIT_INFEASIBLE


def cmd_sweep_k(args: argparse.Namespace, solver_config: SolverConfig) -> tuple[RunReport, int]:
    """Solve every K in ``[k_min, k_max]`` and report the one with the highest modularity."""
    started = time.perf_counter()
    graph = _load_graph(args)
    config = resolve_run_config(args, solver_config, units=graph.n)
    rows: list[PartitionRow] = []
    seconds: dict[str, float] = {}
    for k in range(config.k_min, config.k_max + 1):
        row, elapsed = solve_partition(graph, k, config, solver_config)
        rows.append(row)
        seconds[str(k)] = elapsed
    report = _graph_report("sweepk", graph, config, rows, seconds, started)
    LOGGER.info("sweep K=%d..%d: best K=%s", config.k_min, config.k_max, report.best_k)
    return report, EXIT_OK if all(row.feasible for row in rows) else EXIT_INFEASIBLE


# ─────────────────────────── output ───────────────────────────


def report_table(report: RunReport) -> pd.DataFrame:
    """Tabular form of a report; the columns are listed in ``CSV_COLUMNS``."""
    timing = report.timing.solve_seconds
    if report.number_partition is not None:
        result = report.number_partition
        record = {column: getattr(result, column) for column in CSV_COLUMNS["numpart"][:-1]}
        record["seconds"] = timing.get("numpart")
        return pd.DataFrame([record], columns=CSV_COLUMNS["numpart"])
    records = [
        {
            "k": row.k,
            "modularity": row.modularity,
            "best_energy": row.best_energy,
            "feasible": row.feasible,
            "seconds": timing.get(str(row.k)),
        }
        for row in report.partitions
    ]
    return pd.DataFrame(records, columns=CSV_COLUMNS["graph"])


def render_report(report: RunReport, fmt: str) -> str:
    if fmt == "csv":
        return report_table(report).to_csv(index=False)
    return json.dumps(report.model_dump(mode="json", by_alias=True), indent=2) + "\n"


def emit_report(report: RunReport, fmt: str = "json", destination: Optional[str | TextIO] = None) -> None:
    """
    Write ``report`` as JSON or CSV to a path, a stream or stdout.

    Raises:
        OSError: the destination cannot be written.
    """
    text = render_report(report, fmt)
    if destination is None:
        sys.stdout.write(text)
    elif isinstance(destination, (str, Path)):
        with open(destination, "wt", encoding="utf-8", newline="") as output_file:
            output_file.write(text)
    else:
        destination.write(text)


def companion_path(out: str | Path, fmt: str) -> Path:
    """Path of the second format written next to a ``sweepk`` report (``sweep.json`` -> ``sweep.csv``)."""
    other = "csv" if fmt == "json" else "json"
    path = Path(out)
    companion = path.with_suffix(f".{other}")
    return companion if companion != path else path.with_name(f"{path.name}.{other}")


COMMANDS: dict[str, Callable[[argparse.Namespace, SolverConfig], tuple[RunReport, int]]] = {
    "numpart": cmd_numpart,
    "graphpart": cmd_graphpart,
    "sweepk": cmd_sweep_k,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of ``qubo-anneal``; returns the exit code."""
    args = build_parser().parse_args(argv)
    try:
        solver_config = SolverConfig(load_config(args.config))
        configure_logging(solver_config, args.log_level)
        report, code = COMMANDS[args.command](args, solver_config)
        emit_report(report, report.config.format, report.config.out)
        if args.command == "sweepk" and report.config.out:
            # a sweep written to a file always leaves both the JSON report and the CSV table
            companion = companion_path(report.config.out, report.config.format)
            emit_report(report, "csv" if report.config.format == "json" else "json", companion)
            LOGGER.info("wrote %s", companion)
    except (ValueError, KeyError, OSError) as e:
        message = e.args[0] if isinstance(e, KeyError) and e.args else e
        sys.stderr.write(f"qubo-anneal: error: {message}\n")
        return EXIT_USAGE
    return code
