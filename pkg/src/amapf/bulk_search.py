"""Bulk Search: augmenting paths expanded one connected sequence at a time.

Popping node ``(v, h)`` from OPEN implicitly expands every node of
``(v, [h, high])``, where ``high`` is the top of its connected sequence,
since those are all reachable through un-reversed wait/restriction edges.
Of the move-successors landing in a neighbouring sequence only the lowest
one is generated; the rest of that sequence follows from it the same way.
"""

from __future__ import annotations

import time
from bisect import bisect_left
from heapq import heappop, heappush
from typing import Optional

from .network import SINK, SOURCE, TENetwork

TIMEOUT_STRIDE = 1024


class SearchTimeout(Exception):
    pass


def get_successors(net: TENetwork, node: tuple[int, int], low: int = 0, high: int = 0) -> list:
    """Successors of the bulk ``(v, [h, high])`` as ``(node, from_level)``.

    ``from_level`` is the level inside the bulk that the generating edge
    leaves; it is needed to splice the implicit vertical chain back into the
    path. ``low``/``high`` are the bounds of the popped node's sequence.
    """
    if node == SOURCE:
        return [(succ, -1) for succ, _ in net.residual_neighbors(SOURCE)]
    v, h = node
    out = []
    # only the ends of a sequence can carry reversed edges
    if h == low:
        out.extend((succ, h) for succ, _ in net.residual_neighbors(node))
    if high != h or h != low:
        out.extend((succ, high) for succ, _ in net.residual_neighbors((v, high)))

    # interior: outer (even) levels in [max(low+1, h), high-1] only have plain
    # move edges, landing on inner (odd) levels of the neighbour
    first = max(low + 1, h)
    from_min = first + (first & 1)
    if from_min > high - 1:
        return out
    lowest_target = from_min + 1
    top = net.top
    for u in net.adjacency[v]:
        cuts = net.cuts[u]
        i = bisect_left(cuts, lowest_target)
        seq_low = cuts[i - 1] + 1 if i else 0
        n = len(cuts)
        while seq_low <= high:
            seq_high = cuts[i] if i < n else top
            to_min = seq_low | 1  # lowest inner copy of the sequence
            c = to_min if to_min > lowest_target else lowest_target
            if c <= seq_high and c <= high:
                out.append(((u, c), c - 1))
            if i >= n:
                break
            seq_low = seq_high + 1
            i += 1
    return out


def reconstruct_path(parents: dict, end: tuple[int, int] = SINK) -> list[tuple[int, int]]:
    """Explicit node path SOURCE .. ``end`` from the search records.

    ``parents[child] = (parent, from_level)``; when ``from_level`` is above
    the parent's level the vertical chain between them is spliced in. Any
    cycle the splicing creates is cut out, leaving a simple residual path.
    """
    reverse = [end]
    node = end
    while node != SOURCE:
        parent, from_level = parents[node]
        if parent != SOURCE:
            pv, ph = parent
            if from_level < ph:
                raise RuntimeError(f"splice below parent {parent} at level {from_level}")
            reverse.extend((pv, level) for level in range(from_level, ph, -1))
        reverse.append(parent)
        node = parent
    path: list = []
    position: dict = {}
    for node in reversed(reverse):
        seen_at = position.get(node)
        if seen_at is not None:
            for dropped in path[seen_at + 1:]:
                del position[dropped]
            del path[seen_at + 1:]
            continue
        position[node] = len(path)
        path.append(node)
    return path


def find_augmenting_path(net: TENetwork, stats=None, deadline: Optional[float] = None,
                          trace: Optional[dict] = None) -> Optional[list]:
    """SOURCE->SINK residual path by Bulk Search, or None if none exists.

    OPEN is ordered by (level, vertex, insertion order). SINK is popped as
    soon as it is generated. ``stats`` (a SolveStats) receives expansion and
    generation counts; a ``trace`` dict receives the explicitly expanded
    nodes (``"closed"``, in order) and the search records (``"parents"``).
    """
    counter = 0
    heap = [(-1, -1, counter, SOURCE)]
    parents: dict = {SOURCE: None}
    closed = set()
    order = []
    seq_min_closed: dict = {}  # (vertex, seq low) -> lowest closed level
    seq_min_seen: dict = {}  # (vertex, seq low) -> lowest level in OPEN or CLOSED
    expansions = generated = 0
    bounds = net.sequence_bounds
    try:
        while heap:
            _, _, _, node = heappop(heap)
            if node == SINK:
                return reconstruct_path(parents)
            if node in closed:
                continue
            if node == SOURCE:
                low = high = -1
            else:
                v, h = node
                low, high = bounds(v, h)
                key = (v, low)
                best = seq_min_closed.get(key)
                if best is not None and best <= h:
                    continue
                seq_min_closed[key] = h
            closed.add(node)
            order.append(node)
            expansions += 1
            if deadline is not None and expansions % TIMEOUT_STRIDE == 0 and time.monotonic() > deadline:
                raise SearchTimeout
            for succ, from_level in get_successors(net, node, low, high):
                if succ in parents:
                    continue
                if succ == SINK:
                    level = -2
                else:
                    u, level = succ
                    key = (u, bounds(u, level)[0])
                    best = seq_min_seen.get(key)
                    if best is not None and best <= level:
                        continue
                    seq_min_seen[key] = level
                parents[succ] = (node, from_level)
                counter += 1
                generated += 1
                heappush(heap, (level, succ[0], counter, succ))
        return None
    finally:
        if stats is not None:
            stats.expansions += expansions
            stats.generated += generated
        if trace is not None:
            trace["closed"] = order
            trace["parents"] = parents
