"""Seeded MovingAI-style random maps and scenarios."""

from __future__ import annotations

import random
from collections import Counter
from typing import Optional

from .graph_core import bfs_distances, grid_to_graph
from .grid_io import GridMap, ScenarioEntry


def random_map(width: int, height: int, obstacle_ratio: float, seed: int, name: Optional[str] = None) -> GridMap:
    """Uniformly scattered obstacles, like the ``random-W-H-P`` benchmark maps."""
    rng = random.Random(seed)
    cells = [(x, y) for y in range(height) for x in range(width)]
    blocked = set(rng.sample(cells, round(obstacle_ratio * len(cells))))
    rows = tuple(tuple((x, y) not in blocked for x in range(width)) for y in range(height))
    name = name or f"random-{width}-{height}-{round(obstacle_ratio * 100)}"
    return GridMap(width, height, rows, name)


def random_scenario(grid: GridMap, n: int, seed: int) -> list[ScenarioEntry]:
    """``n`` start/goal pairs inside the largest connected region, with
    pairwise-distinct starts and pairwise-distinct goals."""
    graph = grid_to_graph(grid)
    label = graph.components()
    if not label:
        raise ValueError("map has no passable cell")
    biggest, size = Counter(label).most_common(1)[0]
    if n > size:
        raise ValueError(f"only {size} cells in the largest region, asked for {n} agents")
    region = [v for v in range(graph.vertex_count) if label[v] == biggest]
    rng = random.Random(seed)
    starts = rng.sample(region, n)
    goals = rng.sample(region, n)
    entries = []
    for s, g in zip(starts, goals):
        length = bfs_distances(graph, g)[s]
        entries.append(ScenarioEntry(int(length) // 4, grid.name + ".map", grid.width, grid.height,
                                     graph.cells[s], graph.cells[g], float(length)))
    return entries


def scenario_text(entries: list[ScenarioEntry]) -> str:
    lines = ["version 1"]
    for e in entries:
        lines.append("\t".join(str(f) for f in (e.bucket, e.map_name, e.map_width, e.map_height,
                                                *e.start, *e.goal, f"{e.optimal_length:.8f}")))
    return "\n".join(lines) + "\n"
