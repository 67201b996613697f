import itertools
import random
import sys
from collections import deque
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from amapf.generators import random_map, random_scenario  # noqa: E402
from amapf.graph_core import grid_to_graph, path_graph  # noqa: E402
from amapf.grid_io import GridMap, Instance, build_instance  # noqa: E402
from amapf.network import SOURCE  # noqa: E402

A, B, C, D, E, F = range(6)


@pytest.fixture
def corridor():
    """Six cells A..F in a row; agents at C and F, goals at A and D."""
    grid = GridMap.from_rows(["......"], name="corridor")
    return Instance.from_vertices(path_graph(6), [C, F], [A, D], grid)


def random_instance(seed: int, width: int = 8, height: int = 8, obstacles: float = 0.2, k=None, max_k: int = 6):
    rng = random.Random(seed)
    grid = random_map(width, height, obstacles, seed)
    k = k if k is not None else rng.randint(1, max_k)
    return build_instance(grid, random_scenario(grid, k, seed), k)


def all_small_instances(width: int, height: int, max_k: int):
    """Every connected obstacle layout of the box with every start set and
    every ordered goal tuple of up to ``max_k`` agents."""
    for mask in itertools.product([True, False], repeat=width * height):
        rows = tuple(tuple(mask[y * width + x] for x in range(width)) for y in range(height))
        graph = grid_to_graph(GridMap(width, height, rows))
        if graph.vertex_count == 0 or max(graph.components()) != 0:
            continue
        n = graph.vertex_count
        for k in range(1, min(max_k, n) + 1):
            for starts in itertools.combinations(range(n), k):
                for goals in itertools.permutations(range(n), k):
                    yield graph, list(starts), list(goals)


def residual_reachable(net) -> set:
    seen = {SOURCE}
    queue = deque([SOURCE])
    while queue:
        node = queue.popleft()
        for succ, _ in net.residual_neighbors(node):
            if succ not in seen:
                seen.add(succ)
                queue.append(succ)
    return seen


def is_residual_path(net, path) -> bool:
    for a, b in zip(path, path[1:]):
        if all(node != b for node, _ in net.residual_neighbors(a)):
            return False
    return True


_acceptance_lines = []


def record_criterion(number: int, passed, detail: str) -> None:
    """One summary line per criterion; ``passed=None`` marks a skip."""
    status = "SKIP" if passed is None else "PASS" if passed else "FAIL"
    line = f"criterion {number}: {status}  {detail}"
    _acceptance_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
