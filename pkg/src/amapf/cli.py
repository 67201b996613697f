"""Command-line front end: ``amapf solve | bench | validate | summary | generate``.

Exit codes: 0 ok, 1 usage error, 2 bad input (missing file, parse or schema
error, invalid solution), 3 timeout.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from .flow_solver import ENGINES, InfeasibleError, SolveOptions, SolveTimeout, solve_amapf, solve_at_horizon
from .generators import random_map, random_scenario, scenario_text
from .graph_core import DIRECTIONS
from .grid_io import GridMap, Instance, InstanceError, ParseError, build_instance, parse_map, parse_scenario
from .plan_builder import WAIT, Plan, validate

log = logging.getLogger("amapf")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_TIMEOUT = 0, 1, 2, 3

BENCH_COLUMNS = ["map", "scenario", "agents", "engine", "makespan", "t_probes", "expansions", "generated",
                 "augmentations", "estimator_ms", "solve_ms", "status"]
DEFAULT_SCHEDULE = "1,2,4,8,16,32,64,128,256,512,1000"

LETTER_OF = {d: letter for letter, d in DIRECTIONS.items()}


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def load_map(path: str) -> GridMap:
    return parse_map(_read(path), name=Path(path).stem)


def load_instance(map_path: str, scen_path: str, k: int) -> Instance:
    grid = load_map(map_path)
    return build_instance(grid, parse_scenario(_read(scen_path)), k)


# -- solution documents ---------------------------------------------------------

def encode_actions(instance: Instance, plan: Plan) -> list[str]:
    cells = instance.graph.cells
    letters = []
    here = plan.start
    for target in plan.actions:
        if target is WAIT or target == here:
            letters.append("W")
            continue
        (x0, y0), (x1, y1) = cells[here], cells[target]
        letters.append(LETTER_OF[(x1 - x0, y1 - y0)])
        here = target
    return letters


def decode_actions(grid: GridMap, instance: Instance, start_cell, letters: Sequence[str]) -> list:
    """Letters -> plan actions. Moves into blocked or off-map cells become
    moves to vertex -1 so that validation reports them."""
    actions = []
    x, y = start_cell
    for letter in letters:
        if letter == "W":
            actions.append(WAIT)
            continue
        if letter not in DIRECTIONS:
            raise InputError(f"unknown action {letter!r}")
        dx, dy = DIRECTIONS[letter]
        x, y = x + dx, y + dy
        actions.append(instance.graph.vertex_of.get((x, y), -1))
    return actions


def solution_document(instance: Instance, solution, engine: str) -> dict:
    grid = instance.grid
    cells = instance.graph.cells
    return {
        "map": {"name": grid.name if grid else "", "width": grid.width if grid else 0,
                "height": grid.height if grid else 0},
        "engine": engine,
        "status": "solved",
        "horizon": solution.horizon,
        "makespan": solution.makespan,
        "agents": [{"start": list(cells[p.start]), "goal": list(cells[p.end]), "actions": encode_actions(instance, p)}
                   for p in solution.plans],
        "stats": solution.stats.as_dict(),
    }


def plans_from_document(doc: dict, grid: GridMap, instance: Optional[Instance] = None):
    """Validate the document's shape against ``grid``; return (instance, plans).

    Without ``instance`` the one embedded in the document (agent starts and
    goals) is used.
    """
    try:
        meta = doc["map"]
        agents = doc["agents"]
        if (meta["width"], meta["height"]) != (grid.width, grid.height):
            raise InputError(f"solution is for a {meta['width']}x{meta['height']} map, "
                             f"map is {grid.width}x{grid.height}")
        starts = [tuple(a["start"]) for a in agents]
        goals = [tuple(a["goal"]) for a in agents]
        letters = [a["actions"] for a in agents]
    except (KeyError, TypeError) as exc:
        raise InputError(f"schema mismatch: {exc}") from None
    for cell in starts + goals:
        if len(cell) != 2 or not grid.is_passable(*cell):
            raise InputError(f"schema mismatch: cell {list(cell)} is not a passable map cell")
    if instance is None:
        from .graph_core import grid_to_graph

        graph = grid_to_graph(grid)
        try:
            instance = Instance.from_vertices(graph, [graph.vertex_of[c] for c in starts],
                                              [graph.vertex_of[c] for c in goals], grid)
        except InstanceError as exc:
            raise InputError(f"embedded instance invalid: {exc}") from None
    plans = [Plan(instance.graph.vertex_of[s], decode_actions(grid, instance, s, acts))
             for s, acts in zip(starts, letters)]
    return instance, plans


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _plain(doc: dict) -> str:
    lines = [f"status: {doc['status']}", f"horizon: {doc['horizon']}"]
    if doc["status"] == "solved":
        lines.append(f"makespan: {doc['makespan']}")
        for i, a in enumerate(doc["agents"]):
            lines.append(f"agent {i}: {tuple(a['start'])} -> {tuple(a['goal'])} {''.join(a['actions'])}")
    else:
        lines.append(f"flow: {doc['flow']} of {doc['agents_count']}")
    s = doc["stats"]
    lines.append(f"expansions: {s['expansions']}  generated: {s['generated']}  augmentations: {s['augmentations']}")
    return "\n".join(lines) + "\n"


# -- subcommands ----------------------------------------------------------------

def cmd_solve(args) -> int:
    instance = load_instance(args.map, args.scen, args.agents)
    options = SolveOptions(timeout=args.timeout or None)
    if args.t_override is not None:
        flow, solution, stats = solve_at_horizon(instance, args.t_override, args.engine, options)
        if solution is None:
            doc = {"status": "infeasible", "horizon": args.t_override, "flow": flow, "agents_count": instance.k,
                   "engine": args.engine, "stats": stats.as_dict()}
            _emit(json.dumps(doc, indent=2) + "\n" if args.format == "json" else _plain(doc), args.out)
            return EXIT_OK
    else:
        solution = solve_amapf(instance, args.engine, options)
    report = validate(instance, solution.plans, solution.horizon)
    if not report.ok:
        log.error("solver produced an invalid solution: %s", report.first_failure)
        return EXIT_INPUT
    doc = solution_document(instance, solution, args.engine)
    _emit(json.dumps(doc, indent=2) + "\n" if args.format == "json" else _plain(doc), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    grid = load_map(args.map)
    try:
        doc = json.loads(_read(args.solution))
    except json.JSONDecodeError as exc:
        raise InputError(f"solution is not JSON: {exc}") from None
    instance = None
    if args.scen:
        if args.agents is None:
            raise InputError("--scen needs --agents")
        instance = build_instance(grid, parse_scenario(_read(args.scen)), args.agents)
    instance, plans = plans_from_document(doc, grid, instance)
    report = validate(instance, plans)
    if report.ok:
        print(f"ok: {len(plans)} agents, makespan {max((p.cost() for p in plans), default=0)}")
        return EXIT_OK
    cells = instance.graph.cells

    def cell(v):
        return cells[v] if 0 <= v < len(cells) else "off-map"

    for t, a, u, v in report.illegal_moves:
        print(f"illegal move: step {t} agent {a} {cell(u)} -> {cell(v)}")
    for t, (a, b), v in report.vertex_conflicts:
        print(f"vertex conflict: time {t} agents {a},{b} at {cell(v)}")
    for t, (a, b), (u, v) in report.edge_conflicts:
        print(f"edge conflict: step {t} agents {a},{b} on {cell(u)}-{cell(v)}")
    if not report.goal_coverage:
        print("goals not covered by final positions")
    return EXIT_INPUT


def _bench_job(job) -> list[dict]:
    """One scenario x engine sweep; stops at the first timeout."""
    map_path, scen_path, engine, schedule, timeout = job
    scenario = Path(scen_path).stem
    try:
        grid = load_map(map_path)
        entries = parse_scenario(_read(scen_path))
    except (InputError, ParseError) as exc:
        log.error("%s: %s", scen_path, exc)
        return []
    rows = []
    for k in schedule:
        if k > len(entries):
            break
        row = dict.fromkeys(BENCH_COLUMNS, "")
        row.update(map=grid.name, scenario=scenario, agents=k, engine=engine)
        try:
            solution = solve_amapf(build_instance(grid, entries, k), engine, SolveOptions(timeout=timeout))
        except SolveTimeout as exc:
            row.update(_stat_columns(exc.stats), status="timeout")
            rows.append(row)
            break
        except (InstanceError, InfeasibleError, ValueError) as exc:
            log.error("%s k=%d: %s", scen_path, k, exc)
            row.update(status="error")
            rows.append(row)
            continue
        row.update(_stat_columns(solution.stats), makespan=solution.makespan, status="solved")
        rows.append(row)
    return rows


def _stat_columns(stats) -> dict:
    return {
        "t_probes": len(stats.per_T),
        "expansions": stats.expansions,
        "generated": stats.generated,
        "augmentations": stats.augmentations,
        "estimator_ms": round(stats.estimator_time * 1000, 3),
        "solve_ms": round(stats.total_time * 1000, 3),
    }


def _bench_jobs(maps_dir: str, scens_dir: str, engines, schedule, timeout) -> list:
    jobs = []
    for scen in sorted(Path(scens_dir).glob("*.scen")):
        try:
            entries = parse_scenario(_read(str(scen)))
        except (InputError, ParseError) as exc:
            log.error("%s: %s", scen, exc)
            continue
        if not entries:
            continue
        map_path = Path(maps_dir) / entries[0].map_name
        if not map_path.exists():
            log.error("%s: map %s not found", scen, map_path)
            continue
        for engine in engines:
            jobs.append((str(map_path), str(scen), engine, schedule, timeout))
    return jobs


def run_bench(maps_dir: str, scens_dir: str, engines=("bulk", "baseline"), schedule=(1, 2, 4), timeout=30.0,
              jobs: int = 1) -> list[dict]:
    work = _bench_jobs(maps_dir, scens_dir, engines, list(schedule), timeout)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_bench_job, work))
    else:
        results = [_bench_job(job) for job in work]
    return [row for rows in results for row in rows]


def write_csv(rows: list[dict], handle) -> None:
    writer = csv.DictWriter(handle, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def success_rates(rows: list[dict], schedule_size: Optional[int] = None) -> dict:
    """Per map and engine: solved runs / (scenarios x schedule length)."""
    scenarios: dict = defaultdict(set)
    counts: dict = defaultdict(set)
    solved: dict = defaultdict(int)
    engines: dict = defaultdict(set)
    for row in rows:
        m = row["map"]
        scenarios[m].add(row["scenario"])
        counts[m].add(int(row["agents"]))
        engines[m].add(row["engine"])
        if row["status"] == "solved":
            solved[(m, row["engine"])] += 1
    table = {}
    for m in sorted(scenarios):
        total = len(scenarios[m]) * (schedule_size or len(counts[m]))
        table[m] = {e: solved[(m, e)] / total for e in sorted(engines[m])}
    return table


def cmd_bench(args) -> int:
    schedule = _int_list(args.agent_schedule)
    engines = [e.strip() for e in args.engines.split(",") if e.strip()]
    for e in engines:
        if e not in ENGINES:
            raise _UsageError(f"unknown engine {e!r}")
    rows = run_bench(args.maps, args.scens, engines, schedule, args.timeout or None, args.jobs)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    return EXIT_OK


def cmd_summary(args) -> int:
    with open(args.csv, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    size = len(_int_list(args.agent_schedule)) if args.agent_schedule else None
    table = success_rates(rows, size)
    engines = sorted({e for rates in table.values() for e in rates})
    print(",".join(["map", *engines]))
    for m, rates in table.items():
        print(",".join([m, *(f"{100 * rates.get(e, 0.0):.0f}%" for e in engines)]))
    return EXIT_OK


def cmd_generate(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = random_map(args.width, args.height, args.obstacles, args.seed)
    (out / f"{grid.name}.map").write_text(grid.to_text(), encoding="utf-8")
    for i in range(1, args.scenarios + 1):
        entries = random_scenario(grid, args.agents, args.seed * 1000 + i)
        (out / f"{grid.name}-random-{i}.scen").write_text(scenario_text(entries), encoding="utf-8")
    print(out / f"{grid.name}.map")
    return EXIT_OK


class _UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise _UsageError(f"not a comma-separated integer list: {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise _UsageError("agent counts must be positive")
    return sorted(values)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="amapf", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one instance")
    p.add_argument("--map", required=True)
    p.add_argument("--scen", required=True)
    p.add_argument("--agents", type=_positive_int, required=True)
    p.add_argument("--engine", choices=sorted(ENGINES), default="bulk")
    p.add_argument("--timeout", type=float, default=30.0, help="seconds; 0 disables")
    p.add_argument("--t-override", type=_positive_int, help="solve on exactly this horizon")
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "plain"], default="json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="benchmark sweep, CSV output")
    p.add_argument("--maps", required=True)
    p.add_argument("--scens", required=True)
    p.add_argument("--agent-schedule", default=DEFAULT_SCHEDULE)
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--engines", default="bulk,baseline")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate", help="check a solution file")
    p.add_argument("--map", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--scen")
    p.add_argument("--agents", type=_positive_int)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("summary", help="success rate per map from a bench CSV")
    p.add_argument("csv")
    p.add_argument("--agent-schedule")
    p.set_defaults(func=cmd_summary)

    p = sub.add_parser("generate", help="write a seeded random map and scenarios")
    p.add_argument("--width", type=_positive_int, default=64)
    p.add_argument("--height", type=_positive_int, default=64)
    p.add_argument("--obstacles", type=float, default=0.2)
    p.add_argument("--agents", type=_positive_int, default=256)
    p.add_argument("--scenarios", type=_positive_int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"amapf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, ParseError, InstanceError, InfeasibleError, OSError) as exc:
        print(f"amapf: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolveTimeout as exc:
        print(f"amapf: {exc}", file=sys.stderr)
        return EXIT_TIMEOUT


if __name__ == "__main__":
    sys.exit(main())
