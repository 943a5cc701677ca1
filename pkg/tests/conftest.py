"""Shared fixtures and independent brute-force oracles.

The canonical two-component fixture used throughout ("F1"): one free 1-D
attribute, factuals at 0.0/0.3/0.9 (label 0), candidates at 0.1/0.8 (label 1),
epsilon 0.35, L2 costs. Its expected values are recomputed here by exhaustive
enumeration, never copied from the implementation under test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from cfaudit.density import make_kde
from cfaudit.graph import build_graph, weakly_connected_components
from cfaudit.schema import AttributeSchema, EncodedMatrix
from cfaudit.solvers import SelectionProblem

F1_VALUES = [0.0, 0.3, 0.9, 0.1, 0.8]
F1_LABELS = [0, 0, 0, 1, 1]
F1_EPSILON = 0.35


def make_matrix(
    values: np.ndarray,
    labels: list[int],
    groups: list[str] | None = None,
    constraint: str = "free",
) -> EncodedMatrix:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    n, dims = values.shape
    schema = [
        AttributeSchema(
            name=f"v{col}",
            kind="continuous",
            constraint=constraint,
            bin_count=2,
            encoded_span=(col, col + 1),
        )
        for col in range(dims)
    ]
    groups = groups or ["a"] * n
    return EncodedMatrix(
        values=values,
        row_ids=np.arange(n),
        schema=schema,
        labels=np.array(labels),
        groups=np.array(groups, dtype=object),
        column_names=[s.name for s in schema],
    )


@pytest.fixture
def f1_matrix() -> EncodedMatrix:
    return make_matrix(np.array(F1_VALUES), F1_LABELS)


@pytest.fixture
def f1_graph(f1_matrix):
    return build_graph(f1_matrix, F1_EPSILON, kde=make_kde(f1_matrix.values))


@pytest.fixture
def f1_wcc(f1_graph):
    return weakly_connected_components(f1_graph)


@pytest.fixture
def f1_problem(f1_graph):
    return SelectionProblem.from_graph(f1_graph, factuals=[0, 1, 2], k=2)


def f1_expected_edges() -> set[tuple[int, int]]:
    """All ordered pairs within epsilon (every attribute is free)."""
    edges = set()
    for i, j in itertools.permutations(range(len(F1_VALUES)), 2):
        if abs(F1_VALUES[i] - F1_VALUES[j]) <= F1_EPSILON:
            edges.add((i, j))
    return edges


# ---------------------------------------------------------------------------
# Independent oracles (plain loops over subsets; no shared solver code)
# ---------------------------------------------------------------------------


def brute_max_coverage(cost_matrix: np.ndarray, k: int, d: float) -> tuple[int, int]:
    """(best coverage, smallest subset size achieving it) by full enumeration."""
    nf, nc = cost_matrix.shape
    best_cov, best_size = 0, 0
    for size in range(0, min(k, nc) + 1):
        for combo in itertools.combinations(range(nc), size):
            covered = 0
            for row in range(nf):
                for col in combo:
                    value = cost_matrix[row, col]
                    if math.isfinite(value) and value <= d:
                        covered += 1
                        break
            if covered > best_cov:
                best_cov, best_size = covered, size
        if best_cov == nf:
            break
    return best_cov, best_size


def brute_kcenter(cost_matrix: np.ndarray, k: int, n_required: int) -> float:
    """Optimal min-max radius covering at least n_required factuals; inf if none."""
    nf, nc = cost_matrix.shape
    if n_required == 0:
        return 0.0
    best = math.inf
    for size in range(1, min(k, nc) + 1):
        for combo in itertools.combinations(range(nc), size):
            per_factual = []
            for row in range(nf):
                low = min((cost_matrix[row, col] for col in combo), default=math.inf)
                if math.isfinite(low):
                    per_factual.append(low)
            if len(per_factual) < n_required:
                continue
            per_factual.sort()
            radius = per_factual[n_required - 1]
            if radius < best:
                best = radius
    return best


def random_problem(
    rng: np.random.Generator,
    max_factuals: int = 15,
    max_candidates: int = 10,
    dims: int | None = None,
    ensure_multi_component: bool = False,
):
    """Random encoded matrix -> graph -> selection problem (pipeline-shaped).

    Mirrors the audit pipeline: factuals are label-0 rows with at least one
    reachable candidate (the rest are excluded, as the audit does).
    """
    while True:
        d = dims or int(rng.integers(1, 3))
        nf = int(rng.integers(2, max_factuals + 1))
        nc = int(rng.integers(2, max_candidates + 1))
        if ensure_multi_component:
            centers = rng.uniform(0, 1, (int(rng.integers(2, 5)), d))
            spread = 0.04
            points = np.vstack(
                [
                    centers[rng.integers(0, len(centers))] + rng.normal(0, spread, d)
                    for _ in range(nf + nc)
                ]
            )
            epsilon = 0.12
        else:
            points = rng.uniform(0, 1, (nf + nc, d))
            epsilon = float(rng.uniform(0.25, 1.2))
        if rng.random() < 0.3:  # duplicated geometry: zero-cost pairs
            idx = rng.integers(0, nf, size=min(nc, 3))
            points[nf : nf + len(idx)] = points[idx]
        labels = [0] * nf + [1] * nc
        matrix = make_matrix(points, labels)
        graph = build_graph(matrix, epsilon, kde=make_kde(matrix.values))
        k = int(rng.integers(1, min(nc, 6) + 1))
        problem = SelectionProblem.from_graph(
            graph, factuals=list(range(nf)), k=k, drop_unreachable=True
        )
        if not problem.factuals:
            continue
        if ensure_multi_component:
            wcc = weakly_connected_components(graph)
            spanned = {int(wcc.component_of[f]) for f in problem.factuals}
            if len(spanned) < 2:
                continue
        return problem, graph
