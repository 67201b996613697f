"""MovingAI ``.map`` / ``.scen`` parsing and instance construction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .graph_core import Graph, grid_to_graph

PASSABLE = frozenset(".GS")


class ParseError(ValueError):
    """Malformed map or scenario text. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class InstanceError(ValueError):
    pass


@dataclass(frozen=True)
class GridMap:
    width: int
    height: int
    passable: tuple[tuple[bool, ...], ...]  # passable[y][x]
    name: str = ""

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("map dimensions must be positive")
        if len(self.passable) != self.height or any(len(row) != self.width for row in self.passable):
            raise ValueError("passable grid does not match width x height")

    def is_passable(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height and self.passable[y][x]

    @property
    def passable_count(self) -> int:
        return sum(sum(row) for row in self.passable)

    @classmethod
    def from_rows(cls, rows: Sequence[str], name: str = "") -> "GridMap":
        return cls(len(rows[0]), len(rows), tuple(tuple(ch in PASSABLE for ch in row) for row in rows), name)

    def to_text(self) -> str:
        rows = ["".join("." if p else "@" for p in row) for row in self.passable]
        return "\n".join(["type octile", f"height {self.height}", f"width {self.width}", "map", *rows]) + "\n"


@dataclass(frozen=True)
class ScenarioEntry:
    bucket: int
    map_name: str
    map_width: int
    map_height: int
    start: tuple[int, int]
    goal: tuple[int, int]
    optimal_length: float = 0.0  # single-agent value, never used by the solver


@dataclass
class Instance:
    graph: Graph
    starts: list[int]
    goals: list[int]
    grid: Optional[GridMap] = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return len(self.starts)

    @classmethod
    def from_vertices(cls, graph: Graph, starts: Sequence[int], goals: Sequence[int], grid: Optional[GridMap] = None) -> "Instance":
        """Validated instance over explicit vertex ids."""
        starts, goals = list(starts), list(goals)
        if len(starts) != len(goals):
            raise InstanceError("starts and goals differ in size")
        for name, vs in (("start", starts), ("goal", goals)):
            if len(set(vs)) != len(vs):
                raise InstanceError(f"duplicate {name}")
            for v in vs:
                if not 0 <= v < graph.vertex_count:
                    raise InstanceError(f"{name} vertex {v} not in graph")
        if starts:
            label = graph.components()
            component = label[starts[0]]
            if any(label[v] != component for v in starts + goals):
                raise InstanceError("start-goal disconnected")
        return cls(graph, starts, goals, grid)


def parse_map(text: str, name: str = "") -> GridMap:
    lines = text.splitlines()
    header: dict[str, str] = {}
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line:
            continue
        if line == "map":
            break
        parts = line.split()
        if len(parts) != 2 or parts[0] not in ("type", "height", "width"):
            raise ParseError(f"malformed header: {line!r}", i)
        header[parts[0]] = parts[1]
    else:
        raise ParseError("malformed header: missing 'map' line", len(lines) or None)
    try:
        height, width = int(header["height"]), int(header["width"])
    except KeyError as exc:
        raise ParseError(f"malformed header: missing {exc.args[0]}", i) from None
    except ValueError:
        raise ParseError("malformed header: non-integer dimension", i) from None
    if height < 1 or width < 1:
        raise ParseError("malformed header: dimensions must be positive", i)

    body = lines[i:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != height:
        raise ParseError(f"row count mismatch: expected {height}, got {len(body)}", i + len(body))
    rows = []
    for offset, row in enumerate(body):
        if len(row) != width:
            raise ParseError(f"row length mismatch: expected {width}, got {len(row)}", i + offset + 1)
        rows.append(tuple(ch in PASSABLE for ch in row))
    return GridMap(width, height, tuple(rows), name)


def parse_scenario(text: str) -> list[ScenarioEntry]:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        fields = raw.split()
        if not fields:
            continue
        if fields[0] == "version" and not entries:
            continue
        if len(fields) != 9:
            raise ParseError(f"expected 9 fields, got {len(fields)}", lineno)
        try:
            bucket, w, h, sx, sy, gx, gy = (int(fields[j]) for j in (0, 2, 3, 4, 5, 6, 7))
            length = float(fields[8])
        except ValueError:
            raise ParseError("non-numeric field", lineno) from None
        for x, y in ((sx, sy), (gx, gy)):
            if not (0 <= x < w and 0 <= y < h):
                raise ParseError(f"cell ({x}, {y}) outside declared {w}x{h} map", lineno)
        entries.append(ScenarioEntry(bucket, fields[1], w, h, (sx, sy), (gx, gy), length))
    return entries


def build_instance(grid: GridMap, entries: Sequence[ScenarioEntry], k: int, graph: Optional[Graph] = None) -> Instance:
    """Instance from the first ``k`` scenario entries."""
    if k < 1:
        raise InstanceError("agent count must be positive")
    if k > len(entries):
        raise InstanceError(f"k={k} exceeds the {len(entries)} scenario entries")
    graph = graph if graph is not None else grid_to_graph(grid)
    starts, goals = [], []
    for entry in entries[:k]:
        for kind, cell, out in (("start", entry.start, starts), ("goal", entry.goal, goals)):
            if not grid.is_passable(*cell):
                raise InstanceError(f"{kind} on blocked cell {cell}")
            out.append(graph.vertex_of[cell])
    return Instance.from_vertices(graph, starts, goals, grid)
