"""Command-line entry point and benchmark harness.

Subcommands::

    solve           one one-shot instance with LaCAM
    lifelong        one lifelong simulation
    bench-oneshot   maps x agent counts x strategies x instances, CSV rows
    bench-lifelong  maps x agent counts x strategies x seeds, CSV rows
    gen-map         write a sortation-style map
    gen-scen        write a random instance as a .scen file

Exit status is 0 on success, 2 on a usage or input error and 3 when
``solve`` finishes without a solution (timeout or unsolvable).
"""

from __future__ import annotations

import argparse
import csv
import json
import multiprocessing as mp
import sys
from pathlib import Path

import numpy as np

from .grid_graph import DistanceCache, GridMap, MapParseError, generate_sortation_map, serialize_map
from .instance import Instance, ScenarioError, format_scen, load_scen, random_instance
from .lacam import solve_oneshot
from .lifelong import run_lifelong
from .maps import MapNotFound, resolve_map
from .pibt import Strategy, StrategyConfig

ONESHOT_FIELDS = ["map", "n", "strategy", "seed", "success", "runtime_ms", "soc", "soc_lb", "normalized_soc"]
LIFELONG_FIELDS = ["map", "n", "strategy", "seed", "throughput", "mean_response_ms"]

EXIT_ERROR = 2
EXIT_UNSOLVED = 3


class CliError(Exception):
    pass


# ----------------------------------------------------------------- helpers


def _map_name(spec: str) -> str:
    name = Path(spec).name
    return name[:-4] if name.endswith(".map") else name


def _load_map(spec: str) -> GridMap:
    try:
        return resolve_map(spec)
    except MapNotFound as exc:
        raise CliError(str(exc)) from None
    except MapParseError as exc:
        raise CliError(f"cannot parse map {spec!r}: {exc}") from None
    except OSError as exc:
        raise CliError(f"cannot read map {spec!r}: {exc.strerror}") from None


def _strategy(name: str, args) -> StrategyConfig:
    try:
        return StrategyConfig(Strategy.parse(name), m=args.regret_m, w=args.regret_w, k=args.mc_k)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _split(values) -> list[str]:
    out = []
    for v in values if isinstance(values, (list, tuple)) else [values]:
        out.extend(s for s in str(v).split(",") if s)
    return out


def _ints(values, what: str) -> list[int]:
    try:
        return [int(v) for v in _split(values)]
    except ValueError:
        raise CliError(f"{what} must be integers, got {values!r}") from None


def _check_agents(grid: GridMap, n: int) -> None:
    if not 1 <= n <= grid.num_vertices:
        raise CliError(f"--agents must be in [1, {grid.num_vertices}] for this map, got {n}")


def format_solution(grid: GridMap, configs) -> str:
    """One configuration per line as ``(x,y)`` tuples, x = column, y = row."""
    lines = []
    for q in configs:
        cells = grid.cells[np.asarray(q)]
        lines.append(",".join(f"({int(c)},{int(r)})" for r, c in cells))
    return "\n".join(lines) + "\n"


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path!r}: {exc.strerror}") from None


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    try:
        return open(path, "w", newline=""), True
    except OSError as exc:
        raise CliError(f"cannot write {path!r}: {exc.strerror}") from None


# ------------------------------------------------------------ bench workers

_WORKER_CACHE: dict[str, tuple[GridMap, DistanceCache]] = {}


def _cached_map(spec: str) -> tuple[GridMap, DistanceCache]:
    if spec not in _WORKER_CACHE:
        grid = resolve_map(spec)
        _WORKER_CACHE[spec] = (grid, DistanceCache(grid))
    return _WORKER_CACHE[spec]


def _oneshot_job(job):
    spec, n, strategy, seed, time_limit, solutions_dir = job
    grid, dists = _cached_map(spec)
    inst = random_instance(grid, n, seed)
    res = solve_oneshot(inst, strategy, time_limit, seed, dists)
    if solutions_dir is not None and res.success:
        name = f"{_map_name(spec)}_{n}_{strategy.name}_{seed}.txt"
        Path(solutions_dir, name).write_text(format_solution(grid, res.solution.configs))
    nsoc = res.normalized_soc
    return {
        "map": _map_name(spec),
        "n": n,
        "strategy": strategy.name,
        "seed": seed,
        "success": int(res.success),
        "runtime_ms": f"{res.runtime_ms:.3f}",
        "soc": "" if res.soc is None else res.soc,
        "soc_lb": "" if res.soc_lb is None else res.soc_lb,
        "normalized_soc": "" if nsoc is None else f"{nsoc:.6f}",
    }


def _lifelong_job(job):
    spec, n, strategy, seed, horizon = job
    grid, dists = _cached_map(spec)
    res = run_lifelong(grid, n, horizon, strategy, seed, dists=dists)
    return {
        "map": _map_name(spec),
        "n": n,
        "strategy": strategy.name,
        "seed": seed,
        "throughput": f"{res.throughput:.6f}",
        "mean_response_ms": f"{res.mean_response_ms:.4f}",
    }


def _run_jobs(fn, jobs, n_workers: int):
    """Yield results in job order, on a process pool when ``n_workers > 1``."""
    if n_workers <= 1:
        for job in jobs:
            yield fn(job)
        return
    with mp.get_context("fork").Pool(n_workers) as pool:
        yield from pool.imap(fn, jobs)


def _emit_csv(path, fields, rows) -> int:
    out, close = _open_out(path)
    try:
        writer = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        out.flush()
        count = 0
        for row in rows:
            writer.writerow(row)
            out.flush()
            count += 1
        return count
    finally:
        if close:
            out.close()


# -------------------------------------------------------------- subcommands


def cmd_solve(args) -> int:
    grid = _load_map(args.map)
    strategy = _strategy(args.strategy, args)
    if args.scen is not None:
        if args.agents is None:
            raise CliError("--agents is required")
        try:
            inst = load_scen(args.scen, grid, args.agents)
        except OSError as exc:
            raise CliError(f"cannot read scenario {args.scen!r}: {exc.strerror}") from None
        except ScenarioError as exc:
            raise CliError(f"invalid scenario {args.scen!r}: {exc}") from None
    else:
        if args.agents is None:
            raise CliError("--agents is required")
        _check_agents(grid, args.agents)
        inst = random_instance(grid, args.agents, args.random_seed)
    res = solve_oneshot(inst, strategy, args.time_limit_ms / 1000.0, args.seed)
    if args.out is not None and res.success:
        _write_text(args.out, format_solution(grid, res.solution.configs))
    summary = res.summary()
    summary["status"] = res.status
    print(json.dumps(summary))
    return 0 if res.success else EXIT_UNSOLVED


def cmd_lifelong(args) -> int:
    grid = _load_map(args.map)
    if args.agents is None:
        raise CliError("--agents is required")
    _check_agents(grid, args.agents)
    if args.horizon < 1:
        raise CliError(f"--horizon must be >= 1, got {args.horizon}")
    strategy = _strategy(args.strategy, args)
    res = run_lifelong(grid, args.agents, args.horizon, strategy, args.seed, record=args.record is not None)
    if args.record is not None:
        _write_text(args.record, format_solution(grid, res.trajectory))
    summary = {
        "throughput": res.throughput,
        "mean_response_ms": res.mean_response_ms,
        "p99_response_ms": res.p99_response_ms,
    }
    print(json.dumps(summary))
    return 0


def _bench_setup(args):
    maps = _split(args.map)
    if not maps:
        raise CliError("--map is required")
    agents = _ints(args.agents, "--agents") if args.agents is not None else []
    if not agents:
        raise CliError("--agents is required")
    strategies = [_strategy(s, args) for s in _split(args.strategies)]
    if args.instances < 1:
        raise CliError(f"--instances must be >= 1, got {args.instances}")
    if args.jobs < 1:
        raise CliError(f"--jobs must be >= 1, got {args.jobs}")
    # resolve and check everything before the output file is opened
    for spec in maps:
        grid = _load_map(spec)
        for n in agents:
            _check_agents(grid, n)
    return maps, agents, strategies


def cmd_bench_oneshot(args) -> int:
    maps, agents, strategies = _bench_setup(args)
    if args.time_limit_ms <= 0:
        raise CliError(f"--time-limit-ms must be positive, got {args.time_limit_ms}")
    if args.solutions_dir is not None:
        Path(args.solutions_dir).mkdir(parents=True, exist_ok=True)
    jobs = [
        (spec, n, strategy, args.seed + i, args.time_limit_ms / 1000.0, args.solutions_dir)
        for spec in maps
        for n in agents
        for strategy in strategies
        for i in range(args.instances)
    ]
    _emit_csv(args.out, ONESHOT_FIELDS, _run_jobs(_oneshot_job, jobs, args.jobs))
    return 0


def cmd_bench_lifelong(args) -> int:
    maps, agents, strategies = _bench_setup(args)
    if args.horizon < 1:
        raise CliError(f"--horizon must be >= 1, got {args.horizon}")
    jobs = [
        (spec, n, strategy, args.seed + i, args.horizon)
        for spec in maps
        for n in agents
        for strategy in strategies
        for i in range(args.instances)
    ]
    _emit_csv(args.out, LIFELONG_FIELDS, _run_jobs(_lifelong_job, jobs, args.jobs))
    return 0


def cmd_gen_map(args) -> int:
    try:
        grid = generate_sortation_map(args.rows, args.cols)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    text = serialize_map(grid)
    if args.out is None or args.out == "-":
        sys.stdout.write(text)
    else:
        _write_text(args.out, text)
    return 0


def cmd_gen_scen(args) -> int:
    grid = _load_map(args.map)
    if args.agents is None:
        raise CliError("--agents is required")
    _check_agents(grid, args.agents)
    inst: Instance = random_instance(grid, args.agents, args.random_seed)
    text = format_scen(inst, _map_name(args.map) + ".map")
    if args.out is None or args.out == "-":
        sys.stdout.write(text)
    else:
        _write_text(args.out, text)
    return 0


# ------------------------------------------------------------------ parser


def _add_strategy_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--regret-m", type=int, default=3, help="regret learning iterations (default 3)")
    p.add_argument("--regret-w", type=float, default=0.9, help="regret averaging weight (default 0.9)")
    p.add_argument("--mc-k", type=int, default=10, help="Monte-Carlo sample count (default 10)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pibt-tiebreak", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one one-shot instance with LaCAM")
    p.add_argument("--map", required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--scen", help="MovingAI .scen file (first --agents rows)")
    src.add_argument("--random-seed", type=int, default=0, help="seed of a random instance (default 0)")
    p.add_argument("--agents", type=int)
    p.add_argument("--strategy", default="original")
    p.add_argument("--time-limit-ms", type=float, default=1000.0)
    p.add_argument("--seed", type=int, default=0, help="tiebreak seed")
    p.add_argument("--out", help="solution file")
    _add_strategy_params(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("lifelong", help="run one lifelong simulation")
    p.add_argument("--map", required=True)
    p.add_argument("--agents", type=int)
    p.add_argument("--horizon", type=int, default=1000)
    p.add_argument("--strategy", default="original")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--record", metavar="FILE", help="write the trajectory to FILE")
    _add_strategy_params(p)
    p.set_defaults(func=cmd_lifelong)

    for name, func, help_text in (
        ("bench-oneshot", cmd_bench_oneshot, "one-shot sweep, one CSV row per run"),
        ("bench-lifelong", cmd_bench_lifelong, "lifelong sweep, one CSV row per run"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file of option defaults (keys are option names)")
        p.add_argument("--map", action="append", help="map name or path (repeatable or comma separated)")
        p.add_argument("--agents", action="append", help="agent counts (repeatable or comma separated)")
        p.add_argument("--strategies", default="original", help="comma separated strategy names")
        p.add_argument("--instances", type=int, default=100, help="instances (seeds) per cell")
        p.add_argument("--seed", type=int, default=0, help="first seed")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--out", help="CSV output (default stdout)")
        if name == "bench-oneshot":
            p.add_argument("--time-limit-ms", type=float, default=1000.0)
            p.add_argument("--solutions-dir", help="write each solution file here")
        else:
            p.add_argument("--horizon", type=int, default=1000)
        _add_strategy_params(p)
        p.set_defaults(func=func, _parser=p)

    p = sub.add_parser("gen-map", help="write a sortation-style map")
    p.add_argument("--rows", type=int, default=140)
    p.add_argument("--cols", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_map)

    p = sub.add_parser("gen-scen", help="write a random instance as a .scen file")
    p.add_argument("--map", required=True)
    p.add_argument("--agents", type=int)
    p.add_argument("--random-seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_scen)
    return parser


def _apply_config(args) -> None:
    """Fill options left at their defaults from the ``--config`` JSON file."""
    path = getattr(args, "config", None)
    if path is None:
        return
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read config {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"config {path!r} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise CliError(f"config {path!r} must hold a JSON object")
    parser = args._parser
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest in ("config", "func", "_parser") or not hasattr(args, dest):
            raise CliError(f"unknown config key {key!r}")
        if getattr(args, dest) == parser.get_default(dest):
            setattr(args, dest, value)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        return args.func(args)
    except CliError as exc:
        print(f"pibt-tiebreak: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
