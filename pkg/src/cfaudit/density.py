"""Gaussian kernel density estimation used to weight feasibility-graph edges."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError


@dataclass(frozen=True)
class KdeModel:
    """Isotropic Gaussian KDE over a fixed support population."""

    support_points: np.ndarray  # (m, D)
    bandwidth: float

    def __post_init__(self):
        if self.support_points.ndim != 2 or self.support_points.shape[0] < 1:
            raise UsageError("support_points must be a non-empty (m, D) array")
        if self.bandwidth <= 0:
            raise UsageError("bandwidth must be positive")


def scott_bandwidth(points: np.ndarray) -> float:
    """Rule-of-thumb bandwidth h = mean(per-column std) * m^(-1/(D+4)).

    Standard deviations are population ones (ddof=0). Falls back to
    h = m^(-1/(D+4)) when every column is constant.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise UsageError("points must be an (m, D) array")
    m, dims = points.shape
    if m < 2:
        raise UsageError("scott_bandwidth needs at least 2 points")
    sigma = float(points.std(axis=0).mean())
    scale = m ** (-1.0 / (dims + 4))
    return scale if sigma == 0.0 else sigma * scale


def make_kde(points: np.ndarray, bandwidth: float | None = None) -> KdeModel:
    """KDE over ``points`` with the given bandwidth, or the rule-of-thumb one."""
    points = np.asarray(points, dtype=np.float64)
    h = bandwidth if bandwidth is not None else scott_bandwidth(points)
    return KdeModel(support_points=points, bandwidth=float(h))


def density_at(model: KdeModel, q: np.ndarray) -> float:
    """Gaussian KDE value (1/m) * sum_i (2*pi*h^2)^(-D/2) * exp(-|q - p_i|^2 / (2h^2))."""
    q = np.asarray(q, dtype=np.float64)
    points = model.support_points
    if q.shape != (points.shape[1],):
        raise UsageError(
            f"query has dimension {q.shape}, expected ({points.shape[1]},)"
        )
    return float(density_at_many(model, q[None, :])[0])


def density_at_many(model: KdeModel, queries: np.ndarray) -> np.ndarray:
    """Vectorized density_at for a (q, D) batch of query points."""
    queries = np.asarray(queries, dtype=np.float64)
    points = model.support_points
    m, dims = points.shape
    if queries.ndim != 2 or queries.shape[1] != dims:
        raise UsageError(f"queries must be (q, {dims})")
    h2 = model.bandwidth**2
    norm = (2.0 * np.pi * h2) ** (-dims / 2.0)
    out = np.empty(queries.shape[0], dtype=np.float64)
    # Chunked so the (q, m) distance block stays small at desk scale.
    step = max(1, 2_000_000 // max(m, 1))
    for start in range(0, queries.shape[0], step):
        block = queries[start : start + step]
        sq = ((block[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
        out[start : start + step] = norm * np.exp(-sq / (2.0 * h2)).mean(axis=1)
    return out


def edge_weight(model: KdeModel, a: np.ndarray, b: np.ndarray, cost_ab: float) -> float:
    """Edge weight: density at the midpoint of ``a`` and ``b`` times the edge cost."""
    if cost_ab < 0:
        raise UsageError("cost_ab must be nonnegative")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return density_at(model, (a + b) / 2.0) * cost_ab
