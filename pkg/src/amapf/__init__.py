"""Makespan-optimal anonymous multi-agent path finding via unit max-flow.

Augmenting paths on the time-expanded network are found either node by node
(``baseline``) or with bulk expansion of connected sequences (``bulk``).
"""

from .graph_core import Graph, bfs_distances, bottleneck_lower_bound, grid_to_graph
from .grid_io import (
    GridMap,
    Instance,
    InstanceError,
    ParseError,
    ScenarioEntry,
    build_instance,
    parse_map,
    parse_scenario,
)
from .flow_solver import Solution, SolveOptions, SolveStats, SolveTimeout, max_flow, solve_amapf, solve_at_horizon
from .plan_builder import Plan, ValidationReport, makespan_of, validate

__all__ = [
    "Graph",
    "GridMap",
    "Instance",
    "InstanceError",
    "ParseError",
    "Plan",
    "ScenarioEntry",
    "Solution",
    "SolveOptions",
    "SolveStats",
    "SolveTimeout",
    "ValidationReport",
    "bfs_distances",
    "bottleneck_lower_bound",
    "build_instance",
    "grid_to_graph",
    "makespan_of",
    "max_flow",
    "parse_map",
    "parse_scenario",
    "solve_amapf",
    "solve_at_horizon",
    "validate",
]
