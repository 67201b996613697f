"""Flow paths to agent plans, swap deconfliction and solution validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .grid_io import Instance
from .network import time_of

WAIT = None  # an action is the target vertex of a move, or WAIT


@dataclass
class Plan:
    start: int
    actions: list = field(default_factory=list)

    def positions(self) -> list[int]:
        """Vertex occupied at each time step ``0..len(actions)``."""
        pos = [self.start]
        for a in self.actions:
            pos.append(pos[-1] if a is WAIT else a)
        return pos

    @property
    def end(self) -> int:
        return self.positions()[-1]

    def cost(self) -> int:
        """Steps until the last move; trailing waits are free."""
        pos = self.positions()
        for t in range(len(pos) - 1, 0, -1):
            if pos[t] != pos[t - 1]:
                return t
        return 0


def paths_to_plans(paths: Iterable[Sequence[tuple[int, int]]]) -> list[Plan]:
    """Network node paths covering levels ``0..2T`` -> plans of ``T`` actions.

    Steps leaving an even level are actions (move or wait); steps leaving an
    odd level are restriction edges and produce nothing.
    """
    plans = []
    for path in paths:
        for expected, (_, level) in enumerate(path):
            if level != expected:
                raise ValueError(f"malformed path: level {level} at position {expected}")
        actions = []
        for (v, level), (u, _) in zip(path, path[1:]):
            if level % 2 == 0:
                actions.append(WAIT if u == v else u)
            elif u != v:
                raise ValueError(f"restriction step changes vertex at level {level}")
        plans.append(Plan(path[0][0], actions))
    return plans


def resolve_edge_conflicts(plans: Sequence[Plan]) -> list[Plan]:
    """Remove swap conflicts: when two agents would cross the same edge in
    opposite directions at step ``t``, both wait and exchange the remainder
    of their plans. Vertex occupancy over time is unchanged."""
    plans = [Plan(p.start, list(p.actions)) for p in plans]
    if not plans:
        return plans
    horizon = max(len(p.actions) for p in plans)
    for p in plans:
        p.actions.extend([WAIT] * (horizon - len(p.actions)))
    current = [p.start for p in plans]
    for t in range(horizon):
        swapped = True
        while swapped:
            swapped = False
            at = {v: a for a, v in enumerate(current)}
            for a, p in enumerate(plans):
                target = p.actions[t]
                if target is WAIT or target == current[a]:
                    continue
                b = at.get(target)
                if b is None or plans[b].actions[t] != current[a]:
                    continue
                pa, pb = plans[a], plans[b]
                pa.actions[t] = pb.actions[t] = WAIT
                pa.actions[t + 1:], pb.actions[t + 1:] = pb.actions[t + 1:], pa.actions[t + 1:]
                swapped = True
        current = [c if p.actions[t] is WAIT else p.actions[t] for c, p in zip(current, plans)]
    return plans


@dataclass
class ValidationReport:
    ok: bool
    illegal_moves: list = field(default_factory=list)  # (time, agent, from, to)
    vertex_conflicts: list = field(default_factory=list)  # (time, (a, b), vertex)
    edge_conflicts: list = field(default_factory=list)  # (time, (a, b), (u, v))
    goal_coverage: bool = True
    first_failure: Optional[str] = None


def validate(instance: Instance, plans: Sequence[Plan], horizon: Optional[int] = None) -> ValidationReport:
    """Check legality, vertex/edge conflicts and that the final positions
    are exactly the goal set. Failures are reported, never raised."""
    graph, starts, goals = instance.graph, instance.starts, instance.goals
    report = ValidationReport(ok=True)
    failures = []
    if len(plans) != len(starts):
        failures.append(f"{len(plans)} plans for {len(starts)} agents")
    if sorted(p.start for p in plans) != sorted(starts):
        failures.append("plan starts differ from instance starts")
    if horizon is None:
        horizon = max((len(p.actions) for p in plans), default=0)
    positions = []
    for a, p in enumerate(plans):
        if len(p.actions) > horizon:
            failures.append(f"agent {a} has {len(p.actions)} actions, horizon is {horizon}")
        pos = [p.start]
        for t, target in enumerate(p.actions):
            here = pos[-1]
            if target is not WAIT and target != here:
                if not (0 <= target < graph.vertex_count) or target not in graph.adjacency[here]:
                    report.illegal_moves.append((t, a, here, target))
                    failures.append(f"agent {a} makes an illegal move {here}->{target} at step {t}")
                pos.append(target)
            else:
                pos.append(here)
        pos.extend([pos[-1]] * (horizon + 1 - len(pos)))
        positions.append(pos)

    for t in range(horizon + 1):
        occupant: dict = {}
        for a, pos in enumerate(positions):
            other = occupant.setdefault(pos[t], a)
            if other != a:
                report.vertex_conflicts.append((t, (other, a), pos[t]))
                failures.append(f"vertex conflict at time {t}: agents {other},{a} on {pos[t]}")
        if t == horizon:
            break
        moves: dict = {}
        for a, pos in enumerate(positions):
            if pos[t] != pos[t + 1]:
                moves[(pos[t], pos[t + 1])] = a
        for (u, v), a in moves.items():
            b = moves.get((v, u))
            if b is not None and a < b:
                report.edge_conflicts.append((t, (a, b), (u, v)))
                failures.append(f"edge conflict at step {t}: agents {a},{b} swap {u}<->{v}")

    finals = sorted(pos[-1] for pos in positions)
    report.goal_coverage = finals == sorted(goals)
    if not report.goal_coverage:
        failures.append("final positions do not cover the goals")
    report.ok = not failures
    report.first_failure = failures[0] if failures else None
    return report


def makespan_of(plans: Sequence[Plan], goals: Optional[Iterable[int]] = None) -> int:
    """Latest arrival over agents; trailing waits do not count.

    With ``goals`` given, every agent must end on one of them.
    """
    if goals is not None:
        goal_set = set(goals)
        for a, p in enumerate(plans):
            if p.end not in goal_set:
                raise ValueError(f"agent {a} never rests on a goal")
    return max((p.cost() for p in plans), default=0)


def occupancy(plans: Sequence[Plan]) -> list[tuple[int, int]]:
    """Sorted ``(time, vertex)`` pairs occupied by the plans."""
    return sorted((t, v) for p in plans for t, v in enumerate(p.positions()))


def path_occupancy(path: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    """``(time, vertex)`` projection of a grid-node path, one entry per time step."""
    return [(time_of(level), v) for v, level in path if level % 2 == 0]
