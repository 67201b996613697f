"""Implicit time-expanded flow network.

Grid nodes are ``(vertex, level)`` tuples with levels ``0..2T``:

* level 0 is the initial copy,
* odd level ``2t-1`` is the inner copy of time step ``t``,
* even level ``2t`` (t >= 1) is the outer copy of time step ``t``.

Every vertical edge joins ``level`` and ``level+1`` at one vertex: from an
even level it is a wait edge, from an odd level a restriction edge. Move edges
go from an even level ``L`` at ``u`` to ``L+1`` at a neighbour ``v``. All
capacities are one, so an edge's flow is fully described by whether it is
reversed. Only the reversed edges are stored:

* ``cuts[v]``: sorted levels ``c`` whose vertical edge ``c -> c+1`` is reversed,
* ``reversed_moves``: triples ``(u, L, v)`` for reversed move edges,
* ``source_used`` / ``sink_used``: reversed terminal edges, per start / goal.

A connected sequence is a maximal level interval at one vertex not split by
a cut; it is identified by ``(vertex, low_level)``.
"""

from __future__ import annotations

from bisect import bisect_left, insort
from typing import Iterator, NamedTuple, Optional, Sequence

from .graph_core import Graph

SOURCE = (-1, -1)
SINK = (-2, -1)

# edge kinds reported by residual_neighbors; "back-*" means a reversed edge
# traversed against its direction, cancelling its unit of flow
MOVE, WAIT, RESTRICTION, FROM_SOURCE, TO_SINK = "move", "wait", "restriction", "source", "sink"
BACK_MOVE, BACK_WAIT, BACK_RESTRICTION = "back-move", "back-wait", "back-restriction"


class NetworkError(RuntimeError):
    """Internal inconsistency of the flow network (a bug, not bad input)."""


class ConnectedSequence(NamedTuple):
    vertex: int
    low: int
    high: int


def time_of(level: int) -> int:
    return (level + 1) // 2


def vertical_kind(level: int) -> str:
    """Kind of the vertical edge ``level -> level+1``."""
    return WAIT if level % 2 == 0 else RESTRICTION


class TENetwork:
    def __init__(self, graph: Graph, starts: Sequence[int], goals: Sequence[int], horizon: int):
        if horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {horizon}")
        self.graph = graph
        self.adjacency = graph.adjacency
        self.T = horizon
        self.top = 2 * horizon
        self.starts = list(starts)
        self.goals = list(goals)
        self.start_index = {v: i for i, v in enumerate(self.starts)}
        self.goal_index = {v: i for i, v in enumerate(self.goals)}
        self.cuts: list[list[int]] = [[] for _ in range(graph.vertex_count)]
        self.reversed_moves: set[tuple[int, int, int]] = set()
        self.source_used = [False] * len(self.starts)
        self.sink_used = [False] * len(self.goals)
        self.sequences_created = graph.vertex_count

    @property
    def flow_value(self) -> int:
        return sum(self.source_used)

    # -- connected sequences -------------------------------------------------

    def is_cut(self, v: int, level: int) -> bool:
        cuts = self.cuts[v]
        i = bisect_left(cuts, level)
        return i < len(cuts) and cuts[i] == level

    def sequence_bounds(self, v: int, level: int) -> tuple[int, int]:
        """``(low, high)`` of the connected sequence holding ``(v, level)``."""
        cuts = self.cuts[v]
        i = bisect_left(cuts, level)
        high = cuts[i] if i < len(cuts) else self.top
        low = cuts[i - 1] + 1 if i else 0
        return low, high

    def sequence_of(self, v: int, level: int) -> ConnectedSequence:
        if not 0 <= level <= self.top:
            raise ValueError(f"level {level} outside [0, {self.top}]")
        return ConnectedSequence(v, *self.sequence_bounds(v, level))

    def sequences_at(self, v: int) -> list[ConnectedSequence]:
        bounds = [-1, *self.cuts[v], self.top]
        return [ConnectedSequence(v, bounds[i] + 1, bounds[i + 1]) for i in range(len(bounds) - 1)]

    def sequence_count(self) -> int:
        return self.graph.vertex_count + sum(len(c) for c in self.cuts)

    # -- residual graph --------------------------------------------------------

    def residual_neighbors(self, node: tuple[int, int]) -> list[tuple[tuple[int, int], str]]:
        """One-step residual successors of ``node`` with the edge kind used.

        Residual edges back into SOURCE are never reported: an augmenting
        path gains nothing by returning there.
        """
        if node == SOURCE:
            return [((s, 0), FROM_SOURCE) for i, s in enumerate(self.starts) if not self.source_used[i]]
        if node == SINK:
            return []
        v, level = node
        out = []
        cuts = self.cuts[v]
        i = bisect_left(cuts, level)
        up_cut = i < len(cuts) and cuts[i] == level
        if level < self.top and not up_cut:
            out.append(((v, level + 1), vertical_kind(level)))
        if level > 0 and i and cuts[i - 1] == level - 1:
            out.append(((v, level - 1), BACK_WAIT if level % 2 else BACK_RESTRICTION))
        reversed_moves = self.reversed_moves
        if level % 2 == 0:
            if level < self.top:
                for u in self.adjacency[v]:
                    if (v, level, u) not in reversed_moves:
                        out.append(((u, level + 1), MOVE))
            else:
                g = self.goal_index.get(v)
                if g is not None and not self.sink_used[g]:
                    out.append((SINK, TO_SINK))
        else:
            for u in self.adjacency[v]:
                if (u, level - 1, v) in reversed_moves:
                    out.append(((u, level - 1), BACK_MOVE))
        return out

    def edge_kind(self, a: tuple[int, int], b: tuple[int, int]) -> str:
        """Kind of the residual step ``a -> b`` (raises if there is none)."""
        for node, kind in self.residual_neighbors(a):
            if node == b:
                return kind
        raise NetworkError(f"no residual edge {a} -> {b}")

    # -- augmentation ----------------------------------------------------------

    def reverse_path(self, path: Sequence[tuple[int, int]]) -> set[int]:
        """Reverse every edge of a SOURCE->SINK residual path.

        Forward edges become reversed (flow added); reversed edges walked
        backwards are restored (flow cancelled). Returns the vertices whose
        cut sets changed.
        """
        if len(path) < 2 or path[0] != SOURCE or path[-1] != SINK:
            raise NetworkError("path must run from SOURCE to SINK")
        touched = set()
        for a, b in zip(path, path[1:]):
            if a == SOURCE:
                i = self.start_index.get(b[0])
                if i is None or b[1] != 0 or self.source_used[i]:
                    raise NetworkError(f"bad source edge to {b}")
                self.source_used[i] = True
                continue
            if b == SINK:
                g = self.goal_index.get(a[0])
                if g is None or a[1] != self.top or self.sink_used[g]:
                    raise NetworkError(f"bad sink edge from {a}")
                self.sink_used[g] = True
                continue
            (v, la), (u, lb) = a, b
            if v == u:
                low = min(la, lb)
                cuts = self.cuts[v]
                i = bisect_left(cuts, low)
                present = i < len(cuts) and cuts[i] == low
                if lb == la + 1 and not present:
                    insort(cuts, low)
                elif lb == la - 1 and present:
                    del cuts[i]
                else:
                    raise NetworkError(f"vertical step {a} -> {b} not traversable")
                touched.add(v)
            elif lb == la + 1 and la % 2 == 0 and u in self.adjacency[v] and (v, la, u) not in self.reversed_moves:
                self.reversed_moves.add((v, la, u))
            elif lb == la - 1 and la % 2 == 1 and (u, lb, v) in self.reversed_moves:
                self.reversed_moves.remove((u, lb, v))
            else:
                raise NetworkError(f"step {a} -> {b} not traversable")
        return touched

    # -- flow readout ----------------------------------------------------------

    def flow_successor(self, node: tuple[int, int]) -> Optional[tuple[int, int]]:
        """Head of the unique flow-carrying edge leaving ``node``, if any."""
        v, level = node
        found = []
        if self.is_cut(v, level):
            found.append((v, level + 1))
        if level % 2 == 0:
            for u in self.adjacency[v]:
                if (v, level, u) in self.reversed_moves:
                    found.append((u, level + 1))
        if level == self.top:
            g = self.goal_index.get(v)
            if g is not None and self.sink_used[g]:
                found.append(SINK)
        if len(found) > 1:
            raise NetworkError(f"flow splits at {node}: {found}")
        return found[0] if found else None

    def extract_flow_paths(self) -> list[list[tuple[int, int]]]:
        """Grid-node paths ``(s, 0) .. (g, 2T)``, one per unit of flow,
        ordered as the starts."""
        paths = []
        for i, s in enumerate(self.starts):
            if not self.source_used[i]:
                continue
            node = (s, 0)
            path = [node]
            while True:
                nxt = self.flow_successor(node)
                if nxt is None:
                    raise NetworkError(f"dangling flow at {node}")
                if nxt == SINK:
                    break
                path.append(nxt)
                node = nxt
            if len(path) != self.top + 1:
                raise NetworkError(f"flow path from {s} has {len(path)} nodes")
            paths.append(path)
        return paths

    def reversed_edges(self) -> Iterator[tuple[tuple[int, int], tuple[int, int]]]:
        """Every edge carrying flow, as ``(tail, head)``."""
        for i, s in enumerate(self.starts):
            if self.source_used[i]:
                yield SOURCE, (s, 0)
        for v, cuts in enumerate(self.cuts):
            for c in cuts:
                yield (v, c), (v, c + 1)
        for u, level, v in self.reversed_moves:
            yield (u, level), (v, level + 1)
        for j, g in enumerate(self.goals):
            if self.sink_used[j]:
                yield (g, self.top), SINK

    def check_invariants(self) -> None:
        """Flow conservation plus locality of reversed move edges.

        A reversed move may only leave the low end of a connected sequence
        and only enter the high end of one. Raises NetworkError.
        """
        balance: dict = {}
        for a, b in self.reversed_edges():
            balance[a] = balance.get(a, 0) - 1
            balance[b] = balance.get(b, 0) + 1
        for node, net_in in balance.items():
            if node in (SOURCE, SINK):
                continue
            if net_in:
                raise NetworkError(f"conservation violated at {node}: {net_in:+d}")
        if balance.get(SOURCE, 0) != -balance.get(SINK, 0):
            raise NetworkError("source and sink flow differ")
        for u, level, v in self.reversed_moves:
            if self.sequence_bounds(u, level)[0] != level:
                raise NetworkError(f"reversed move leaves interior node {(u, level)}")
            if self.sequence_bounds(v, level + 1)[1] != level + 1:
                raise NetworkError(f"reversed move enters interior node {(v, level + 1)}")
