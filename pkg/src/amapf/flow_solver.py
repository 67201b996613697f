"""Ford-Fulkerson on the time-expanded network and the outer makespan search."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .baseline_search import find_augmenting_path_bfs
from .bulk_search import SearchTimeout, find_augmenting_path
from .graph_core import bottleneck_lower_bound
from .grid_io import Instance
from .network import TENetwork
from .plan_builder import Plan, makespan_of, paths_to_plans, resolve_edge_conflicts

log = logging.getLogger(__name__)

ENGINES: dict[str, Callable] = {
    "bulk": find_augmenting_path,
    "baseline": find_augmenting_path_bfs,
}


class SolveTimeout(Exception):
    def __init__(self, stats: "SolveStats"):
        self.stats = stats
        super().__init__(f"time limit exceeded after {stats.total_time:.2f}s")


class InfeasibleError(Exception):
    pass


@dataclass
class TProbe:
    T: int
    flow: int
    expansions: int
    generated: int
    sequences: int
    wall_time: float


@dataclass
class SolveStats:
    expansions: int = 0
    generated: int = 0
    sequences_created: int = 0
    augmentations: int = 0
    per_T: list[TProbe] = field(default_factory=list)
    lower_bound: int = 0
    estimator_time: float = 0.0
    total_time: float = 0.0

    def as_dict(self) -> dict:
        return {
            "expansions": self.expansions,
            "generated": self.generated,
            "sequences_created": self.sequences_created,
            "augmentations": self.augmentations,
            "lower_bound": self.lower_bound,
            "estimator_time": self.estimator_time,
            "total_time": self.total_time,
            "per_T": [vars(p) for p in self.per_T],
        }


@dataclass
class Solution:
    plans: list[Plan]
    makespan: int
    horizon: int
    assignment: list[int]  # goal index reached by each agent
    stats: SolveStats


@dataclass
class SolveOptions:
    timeout: Optional[float] = 30.0
    check_invariants: bool = False


def max_flow(net: TENetwork, k: int, engine: str = "bulk", stats: Optional[SolveStats] = None,
             deadline: Optional[float] = None, check_invariants: bool = False):
    """Augment until no path is left or the flow reaches ``k``.

    Returns ``(flow value, paths)``; ``paths`` are the extracted flow paths
    when the value is ``k`` and None otherwise. The number of distinct
    connected sequences presented to the searches of this run is stored on
    ``net.sequences_created`` and added to ``stats.sequences_created``.
    """
    finder = ENGINES[engine]
    stats = stats if stats is not None else SolveStats()
    top = net.top
    sequences = net.graph.vertex_count
    seen: set = set()
    pending: set = set()
    while net.flow_value < k:
        for v in pending:
            for seq in net.sequences_at(v):
                if (seq.low, seq.high) != (0, top) and seq not in seen:
                    seen.add(seq)
                    sequences += 1
        pending.clear()
        path = finder(net, stats, deadline)
        if path is None:
            break
        pending = net.reverse_path(path)
        stats.augmentations += 1
        if check_invariants:
            net.check_invariants()
    stats.sequences_created += sequences
    net.sequences_created = sequences
    flow = net.flow_value
    return flow, (net.extract_flow_paths() if flow == k else None)


def _plans_from_paths(instance: Instance, paths) -> list[Plan]:
    return resolve_edge_conflicts(paths_to_plans(paths))


def _probe(instance: Instance, T: int, engine: str, stats: SolveStats, deadline, check_invariants):
    net = TENetwork(instance.graph, instance.starts, instance.goals, T)
    before = (stats.expansions, stats.generated)
    t0 = time.perf_counter()
    flow, paths = max_flow(net, instance.k, engine, stats, deadline, check_invariants)
    stats.per_T.append(TProbe(T, flow, stats.expansions - before[0], stats.generated - before[1],
                              net.sequences_created, time.perf_counter() - t0))
    log.debug("T=%d flow=%d/%d expansions=%d", T, flow, instance.k, stats.per_T[-1].expansions)
    return flow, paths


def _solution(instance: Instance, paths, T: int, stats: SolveStats) -> Solution:
    plans = _plans_from_paths(instance, paths)
    goal_index = {g: j for j, g in enumerate(instance.goals)}
    return Solution(plans, makespan_of(plans, instance.goals), T, [goal_index[p.end] for p in plans], stats)


def _trivial(instance: Instance, stats: SolveStats) -> Optional[Solution]:
    if sorted(instance.starts) != sorted(instance.goals):
        return None
    goal_index = {g: j for j, g in enumerate(instance.goals)}
    return Solution([Plan(s, []) for s in instance.starts], 0, 0, [goal_index[s] for s in instance.starts], stats)


def solve_at_horizon(instance: Instance, T: int, engine: str = "bulk", options: Optional[SolveOptions] = None):
    """Max flow on the network of exactly ``T`` steps.

    Returns ``(flow value, Solution or None, stats)``; a solution exists iff
    the flow equals the number of agents.
    """
    options = options or SolveOptions()
    stats = SolveStats()
    start = time.perf_counter()
    deadline = time.monotonic() + options.timeout if options.timeout else None
    trivial = _trivial(instance, stats)
    if trivial is not None and T == 0:
        return instance.k, trivial, stats
    try:
        flow, paths = _probe(instance, T, engine, stats, deadline, options.check_invariants)
    except SearchTimeout:
        stats.total_time = time.perf_counter() - start
        raise SolveTimeout(stats) from None
    stats.total_time = time.perf_counter() - start
    if paths is None:
        return flow, None, stats
    return flow, _solution(instance, paths, T, stats), stats


def solve_amapf(instance: Instance, engine: str = "bulk", options: Optional[SolveOptions] = None) -> Solution:
    """Makespan-optimal plans: the smallest T whose network carries ``k``
    units of flow, probing upwards from the bottleneck lower bound."""
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    options = options or SolveOptions()
    stats = SolveStats()
    t0 = time.perf_counter()
    stats.lower_bound = bottleneck_lower_bound(instance.graph, instance.starts, instance.goals)
    stats.estimator_time = time.perf_counter() - t0

    start = time.perf_counter()
    deadline = time.monotonic() + options.timeout if options.timeout else None
    trivial = _trivial(instance, stats)
    if trivial is not None:
        return trivial
    cap = max(instance.k + instance.graph.vertex_count - 2, 1)
    T = max(stats.lower_bound, 1)
    try:
        while T <= cap:
            flow, paths = _probe(instance, T, engine, stats, deadline, options.check_invariants)
            if paths is not None:
                stats.total_time = time.perf_counter() - start
                return _solution(instance, paths, T, stats)
            if deadline is not None and time.monotonic() > deadline:
                raise SearchTimeout
            T += 1
    except SearchTimeout:
        stats.total_time = time.perf_counter() - start
        raise SolveTimeout(stats) from None
    raise InfeasibleError(f"no solution within horizon cap {cap}")
