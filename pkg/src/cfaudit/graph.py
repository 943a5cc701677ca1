"""Directed density-weighted feasibility graph, components, and reachability.

An edge i -> j exists iff the transition respects every attribute constraint
and the plain L2 distance between the encoded rows is within epsilon. Edge
cost is that L2 distance; edge weight is midpoint KDE density times cost.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .density import KdeModel, density_at_many, make_kde
from .errors import UsageError
from .schema import EncodedMatrix, feasibility_mask

EDGE_COST_KIND = "l2"  # base cost used for the epsilon test


@dataclass
class FeasibilityGraph:
    matrix: EncodedMatrix
    epsilon: float
    bandwidth: float
    edges_src: np.ndarray
    edges_dst: np.ndarray
    edges_cost: np.ndarray
    edges_weight: np.ndarray
    cost_kind_for_edges: str = EDGE_COST_KIND
    _offsets: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        if self._offsets is None:
            counts = np.bincount(self.edges_src, minlength=self.matrix.n_rows + 1)
            self._offsets = np.concatenate(([0], np.cumsum(counts[:-1]))).astype(np.int64)
            self._offsets = np.append(self._offsets, len(self.edges_src))

    @property
    def n_nodes(self) -> int:
        return self.matrix.n_rows

    @property
    def n_edges(self) -> int:
        return len(self.edges_src)

    def out_neighbors(self, node: int) -> np.ndarray:
        start, stop = self._offsets[node], self._offsets[node + 1]
        return self.edges_dst[start:stop]

    def out_edges(self, node: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(dst, cost, weight) arrays of the node's outgoing edges."""
        start, stop = self._offsets[node], self._offsets[node + 1]
        return (
            self.edges_dst[start:stop],
            self.edges_cost[start:stop],
            self.edges_weight[start:stop],
        )


@dataclass
class WccIndex:
    component_of: np.ndarray  # (n,) component id per node
    components: list[list[int]]  # node lists, sorted, indexed by component id

    @property
    def m(self) -> int:
        return len(self.components)


@dataclass
class FeasibilitySet:
    """Opposite-class nodes reachable from one factual, with their costs."""

    factual: int
    costs: dict[int, float]


def build_graph(
    matrix: EncodedMatrix,
    epsilon: float,
    kde: KdeModel | None = None,
    bandwidth: float | None = None,
) -> FeasibilityGraph:
    """Enumerate all ordered pairs and keep feasible transitions within epsilon."""
    if epsilon <= 0:
        raise UsageError("epsilon must be positive")
    if kde is None:
        kde = make_kde(matrix.values, bandwidth)
    n = matrix.n_rows
    values = matrix.values
    if n == 0:
        empty = np.zeros(0)
        return FeasibilityGraph(
            matrix, epsilon, kde.bandwidth,
            empty.astype(np.int64), empty.astype(np.int64), empty, empty,
        )
    feasible = feasibility_mask(matrix)
    np.fill_diagonal(feasible, False)
    sq = ((values[:, None, :] - values[None, :, :]) ** 2).sum(axis=2)
    dist = np.sqrt(sq)
    keep = feasible & (dist <= epsilon)
    src, dst = np.nonzero(keep)  # row-major: already sorted by (src, dst)
    cost = dist[src, dst]
    midpoints = (values[src] + values[dst]) / 2.0
    weight = density_at_many(kde, midpoints) * cost if len(src) else np.zeros(0)
    return FeasibilityGraph(
        matrix=matrix,
        epsilon=epsilon,
        bandwidth=kde.bandwidth,
        edges_src=src.astype(np.int64),
        edges_dst=dst.astype(np.int64),
        edges_cost=cost.astype(np.float64),
        edges_weight=np.asarray(weight, dtype=np.float64),
    )


def weakly_connected_components(graph: FeasibilityGraph) -> WccIndex:
    """Components of the undirected skeleton; ids ordered by minimum node id."""
    n = graph.n_nodes
    undirected: list[set[int]] = [set() for _ in range(n)]
    for s, d in zip(graph.edges_src, graph.edges_dst):
        undirected[int(s)].add(int(d))
        undirected[int(d)].add(int(s))
    component_of = np.full(n, -1, dtype=np.int64)
    components: list[list[int]] = []
    for start in range(n):  # ascending start => ids ordered by min node id
        if component_of[start] >= 0:
            continue
        cid = len(components)
        stack = [start]
        component_of[start] = cid
        members = [start]
        while stack:
            node = stack.pop()
            for nxt in undirected[node]:
                if component_of[nxt] < 0:
                    component_of[nxt] = cid
                    stack.append(nxt)
                    members.append(nxt)
        components.append(sorted(members))
    return WccIndex(component_of=component_of, components=components)


def reachable_from(graph: FeasibilityGraph, node: int) -> np.ndarray:
    """Boolean mask of nodes reachable from ``node`` by directed paths (BFS)."""
    _check_node(graph, node)
    seen = np.zeros(graph.n_nodes, dtype=bool)
    seen[node] = True
    frontier = [node]
    while frontier:
        nxt: list[int] = []
        for u in frontier:
            for v in graph.out_neighbors(u):
                if not seen[v]:
                    seen[v] = True
                    nxt.append(int(v))
        frontier = nxt
    return seen


def _bfs_depths(graph: FeasibilityGraph, source: int) -> np.ndarray:
    depths = np.full(graph.n_nodes, np.inf)
    depths[source] = 0.0
    frontier = [source]
    level = 0
    while frontier:
        level += 1
        nxt: list[int] = []
        for u in frontier:
            for v in graph.out_neighbors(u):
                if math.isinf(depths[v]):
                    depths[v] = level
                    nxt.append(int(v))
        frontier = nxt
    return depths


def _dijkstra(graph: FeasibilityGraph, source: int) -> np.ndarray:
    dist = np.full(graph.n_nodes, np.inf)
    dist[source] = 0.0
    heap: list[tuple[float, int]] = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        dsts, _costs, weights = graph.out_edges(u)
        for v, w in zip(dsts, weights):
            nd = d + float(w)
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, int(v)))
    return dist


def path_costs_from(graph: FeasibilityGraph, source: int, kind: str) -> np.ndarray:
    """Per-node cost from ``source`` under the given kind; inf where unreachable."""
    _check_node(graph, source)
    if kind == "l2":
        mask = reachable_from(graph, source)
        diffs = graph.matrix.values - graph.matrix.values[source]
        dist = np.sqrt((diffs**2).sum(axis=1))
        dist[~mask] = np.inf
        return dist
    if kind == "hop_count":
        return _bfs_depths(graph, source)
    if kind == "shortest_path_weight":
        return _dijkstra(graph, source)
    raise UsageError(f"unknown cost kind {kind!r}")


def feasibility_set(graph: FeasibilityGraph, node: int, kind: str = "l2") -> FeasibilitySet:
    """Reachable opposite-class nodes of ``node`` with per-kind costs."""
    _check_node(graph, node)
    costs = path_costs_from(graph, node, kind)
    own_label = graph.matrix.labels[node]
    out: dict[int, float] = {}
    for target in np.nonzero(np.isfinite(costs))[0]:
        target = int(target)
        if target != node and graph.matrix.labels[target] != own_label:
            out[target] = float(costs[target])
    return FeasibilitySet(factual=node, costs=out)


@dataclass(frozen=True)
class SweepRecord:
    epsilon: float
    edge_count: int
    component_count: int
    singleton_count: int
    largest_component_fraction: float


def epsilon_sweep(
    matrix: EncodedMatrix,
    epsilons: list[float],
    kde: KdeModel | None = None,
    bandwidth: float | None = None,
) -> list[SweepRecord]:
    """Connectivity statistics from a fresh graph build per epsilon."""
    if not epsilons:
        raise UsageError("epsilons must be nonempty")
    if any(b <= a for a, b in zip(epsilons, epsilons[1:])):
        raise UsageError("epsilons must be strictly ascending")
    if kde is None and matrix.n_rows >= 2:
        kde = make_kde(matrix.values, bandwidth)
    records = []
    for eps in epsilons:
        graph = build_graph(matrix, eps, kde=kde, bandwidth=bandwidth)
        wcc = weakly_connected_components(graph)
        sizes = [len(c) for c in wcc.components]
        records.append(
            SweepRecord(
                epsilon=float(eps),
                edge_count=graph.n_edges,
                component_count=wcc.m,
                singleton_count=sum(1 for s in sizes if s == 1),
                largest_component_fraction=(max(sizes) / matrix.n_rows) if sizes else 0.0,
            )
        )
    return records


def write_graph_csv(graph: FeasibilityGraph, csv_path: str, meta_path: str | None = None) -> None:
    """Persist edges as ``src,dst,cost,weight`` plus a JSON header document."""
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("src,dst,cost,weight\n")
        for s, d, c, w in zip(
            graph.edges_src, graph.edges_dst, graph.edges_cost, graph.edges_weight
        ):
            fh.write(f"{int(s)},{int(d)},{float(c)!r},{float(w)!r}\n")
    if meta_path is not None:
        meta = {
            "epsilon": graph.epsilon,
            "cost_kind_for_edges": graph.cost_kind_for_edges,
            "kde_bandwidth": graph.bandwidth,
            "nodes": [
                {
                    "id": int(i),
                    "label": int(graph.matrix.labels[i]),
                    "group": str(graph.matrix.groups[i]),
                }
                for i in range(graph.n_nodes)
            ],
        }
        with open(meta_path, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _check_node(graph: FeasibilityGraph, node: int) -> None:
    if not 0 <= node < graph.n_nodes:
        raise UsageError(f"node {node} not in graph (n={graph.n_nodes})")
