"""Grid graphs, BFS distances and the bottleneck-assignment makespan bound."""

from __future__ import annotations

from collections import deque
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

if TYPE_CHECKING:
    from .grid_io import GridMap

INFINITY = float("inf")

# 4-connected moves as (dx, dy); y grows downwards (row index).
DIRECTIONS = {"U": (0, -1), "D": (0, 1), "L": (-1, 0), "R": (1, 0)}


class Graph:
    """Undirected graph with integer vertices ``0..vertex_count-1``.

    ``cells[v]`` is the ``(x, y)`` grid cell of vertex ``v`` when the graph
    was built from a map; hand-made graphs may leave it empty.
    """

    def __init__(self, adjacency: Sequence[Iterable[int]], cells: Optional[Sequence[tuple[int, int]]] = None):
        self.adjacency: list[list[int]] = [sorted(set(nbs)) for nbs in adjacency]
        self.cells: list[tuple[int, int]] = list(cells) if cells is not None else []
        self.vertex_of: dict[tuple[int, int], int] = {c: v for v, c in enumerate(self.cells)}
        for v, nbs in enumerate(self.adjacency):
            for u in nbs:
                if v not in self.adjacency[u]:
                    raise ValueError(f"adjacency is not symmetric: {v}->{u}")

    @property
    def vertex_count(self) -> int:
        return len(self.adjacency)

    @property
    def edge_count(self) -> int:
        return sum(len(nbs) for nbs in self.adjacency) // 2

    def neighbors(self, v: int) -> list[int]:
        return self.adjacency[v]

    def components(self) -> list[int]:
        """Connected-component label per vertex."""
        label = [-1] * self.vertex_count
        current = 0
        for root in range(self.vertex_count):
            if label[root] >= 0:
                continue
            label[root] = current
            queue = deque([root])
            while queue:
                v = queue.popleft()
                for u in self.adjacency[v]:
                    if label[u] < 0:
                        label[u] = current
                        queue.append(u)
            current += 1
        return label

    def __repr__(self) -> str:
        return f"Graph(|V|={self.vertex_count}, |E|={self.edge_count})"


def grid_to_graph(grid: GridMap) -> Graph:
    cells = [(x, y) for y in range(grid.height) for x in range(grid.width) if grid.is_passable(x, y)]
    index = {c: v for v, c in enumerate(cells)}
    adjacency: list[list[int]] = []
    for x, y in cells:
        nbs = []
        for dx, dy in DIRECTIONS.values():
            u = index.get((x + dx, y + dy))
            if u is not None:
                nbs.append(u)
        adjacency.append(nbs)
    return Graph(adjacency, cells)


def path_graph(n: int) -> Graph:
    """Path ``0-1-...-(n-1)`` laid out as a single row of cells."""
    return Graph([[u for u in (v - 1, v + 1) if 0 <= u < n] for v in range(n)], [(v, 0) for v in range(n)])


def bfs_distances(graph: Graph, source: int) -> list:
    """Unit-cost distances from ``source``; unreachable vertices get ``INFINITY``."""
    dist: list = [INFINITY] * graph.vertex_count
    dist[source] = 0
    queue = deque([source])
    adjacency = graph.adjacency
    while queue:
        v = queue.popleft()
        d = dist[v] + 1
        for u in adjacency[v]:
            if dist[u] == INFINITY:
                dist[u] = d
                queue.append(u)
    return dist


def distance_matrix(graph: Graph, starts: Sequence[int], goals: Sequence[int]) -> list[list]:
    """``dist[i][j]`` = shortest distance from ``starts[i]`` to ``goals[j]``.

    Filled column by column from one BFS per goal.
    """
    dist = [[INFINITY] * len(goals) for _ in starts]
    for j, g in enumerate(goals):
        from_goal = bfs_distances(graph, g)
        for i, s in enumerate(starts):
            dist[i][j] = from_goal[s]
    return dist


def has_perfect_matching(dist: Sequence[Sequence], threshold) -> bool:
    """Perfect matching in the bipartite graph ``{(i, j): dist[i][j] <= threshold}``.

    Simple augmenting paths (Kuhn's algorithm), O(k * |edges|).
    """
    k = len(dist)
    allowed = [[j for j in range(k) if dist[i][j] <= threshold] for i in range(k)]
    match_goal = [-1] * k

    def augment(root: int) -> bool:
        # iterative DFS over alternating paths
        seen = [False] * k
        stack = [(root, iter(allowed[root]))]
        trail: list[tuple[int, int]] = []
        while stack:
            i, it = stack[-1]
            advanced = False
            for j in it:
                if seen[j]:
                    continue
                seen[j] = True
                owner = match_goal[j]
                trail.append((i, j))
                if owner < 0:
                    for a, b in trail:
                        match_goal[b] = a
                    return True
                stack.append((owner, iter(allowed[owner])))
                advanced = True
                break
            if not advanced:
                stack.pop()
                if trail:
                    trail.pop()
        return False

    return all(augment(i) for i in range(k))


def bottleneck_lower_bound(graph: Graph, starts: Sequence[int], goals: Sequence[int]) -> int:
    """Smallest ``T`` such that some perfect start/goal assignment has every
    distance ``<= T``. Lower-bounds the optimal makespan.
    """
    if len(starts) != len(goals):
        raise ValueError("starts and goals differ in size")
    if not starts:
        return 0
    dist = distance_matrix(graph, starts, goals)
    values = sorted({d for row in dist for d in row if d != INFINITY})
    if not values or not has_perfect_matching(dist, values[-1]):
        raise ValueError("no perfect assignment: some start cannot reach enough goals")
    lo, hi = 0, len(values) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if has_perfect_matching(dist, values[mid]):
            hi = mid
        else:
            lo = mid + 1
    return int(values[lo])
