"""Interchangeable transition-cost functions and their set-lifted forms.

Cost kinds:
  l2                   -> Euclidean distance between encoded rows
  shortest_path_weight -> minimum total edge weight along directed paths
  hop_count            -> minimum number of directed edges

Path-based kinds need a feasibility graph. Set-lifted costs treat nodes that
are unreachable in the supplied graph as infinitely costly, so coverage logic
stays exact (no large sentinel values).
"""

from __future__ import annotations

import math
from collections.abc import Iterable

import numpy as np

from .errors import UsageError
from .graph import FeasibilityGraph, path_costs_from, reachable_from
from .schema import EncodedMatrix

COST_KINDS = ("l2", "shortest_path_weight", "hop_count")
CLI_COST_ALIASES = {"l2": "l2", "path": "shortest_path_weight", "hops": "hop_count"}


def normalize_cost_kind(kind: str) -> str:
    canonical = CLI_COST_ALIASES.get(kind, kind)
    if canonical not in COST_KINDS:
        raise UsageError(f"unknown cost kind {kind!r}")
    return canonical


def pair_cost(
    matrix: EncodedMatrix,
    a: int,
    b: int,
    kind: str = "l2",
    graph: FeasibilityGraph | None = None,
) -> float:
    """Cost of transitioning from row ``a`` to row ``b``; inf if unreachable."""
    kind = normalize_cost_kind(kind)
    if kind == "l2":
        return float(np.linalg.norm(matrix.values[a] - matrix.values[b]))
    if graph is None:
        raise UsageError(f"cost kind {kind!r} requires a feasibility graph")
    return float(path_costs_from(graph, a, kind)[b])


def instance_to_set_cost(
    matrix: EncodedMatrix,
    x: int,
    subset: Iterable[int],
    kind: str = "l2",
    graph: FeasibilityGraph | None = None,
) -> float:
    """min over the subset of pair costs from ``x``; inf if none is reachable.

    When a graph is supplied, l2 costs are restricted to graph-reachable
    targets; path-based kinds carry reachability inherently.
    """
    subset = list(subset)
    if not subset:
        raise UsageError("subset must be nonempty")
    kind = normalize_cost_kind(kind)
    if kind == "l2":
        if graph is not None:
            mask = reachable_from(graph, x)
            reachable = [s for s in subset if mask[s] or s == x]
        else:
            reachable = subset
        if not reachable:
            return math.inf
        return min(pair_cost(matrix, x, s, "l2") for s in reachable)
    if graph is None:
        raise UsageError(f"cost kind {kind!r} requires a feasibility graph")
    costs = path_costs_from(graph, x, kind)
    return float(min(costs[s] for s in subset))


def set_to_set_cost(
    matrix: EncodedMatrix,
    xs: Iterable[int],
    subset: Iterable[int],
    kind: str = "l2",
    graph: FeasibilityGraph | None = None,
) -> float:
    """Min-max objective: max over ``xs`` of each instance's cost to the subset."""
    xs = list(xs)
    subset = list(subset)
    if not xs or not subset:
        raise UsageError("both node sets must be nonempty")
    return max(instance_to_set_cost(matrix, x, subset, kind, graph) for x in xs)
