"""Group and subgroup audit metrics: minimum resources, AUC curves, ACF.

Coverage is reported as a fraction of the audited (coverable) factuals.
Curve areas use the trapezoidal rule on nice-number grids; normalized scores
divide by the area of the constant curve at the best attainable value, so
every normalized score lies in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, UsageError
from .graph import FeasibilityGraph, WccIndex
from .schema import EncodedMatrix
from .solvers import (
    DEFAULT_EXACT_CAP,
    SelectionProblem,
    Solution,
    component_problems,
    exact_kcenter_count,
    exact_max_coverage,
    greedy_max_coverage,
    _full_cover_size,
    _greedy_kcenter_count,
    _kcenter_at,
)

NICE_INTEGER_MANTISSAS = (1, 2, 3, 4, 5, 7, 10)


def _nice_round(raw: float, mantissas: tuple[int, ...]) -> float:
    """Snap to the nearest mantissa scaled by the raw value's magnitude, ties up."""
    magnitude = 10.0 ** math.floor(math.log10(raw))
    mantissa = raw / magnitude
    best = mantissas[0]
    best_gap = abs(mantissa - best)
    for option in mantissas[1:]:
        gap = abs(mantissa - option)
        if gap < best_gap - 1e-12 or (abs(gap - best_gap) <= 1e-12 and option > best):
            best, best_gap = option, gap
    return best * magnitude


def nice_grid(lo: float, hi: float, n: int, integer: bool = False) -> list[float]:
    """Ascending grid from ``lo`` stepping by a nice spacing, ending at ``hi``.

    The raw spacing (hi - lo)/(n - 1) is rounded to the nearest nice value:
    integers snap to {1,2,3,4,5,7,10} scaled by powers of ten, decimals to
    whole mantissas 1..10. ``hi`` is appended when the last step falls short.
    """
    if not lo < hi:
        raise UsageError("grid needs lo < hi")
    if n < 2:
        raise UsageError("grid needs at least 2 points")
    raw = (hi - lo) / (n - 1)
    if integer:
        spacing = 1.0 if raw <= 1.0 else float(round(_nice_round(raw, NICE_INTEGER_MANTISSAS)))
    else:
        spacing = _nice_round(raw, tuple(range(1, 11)))
    grid = [float(lo)]
    step = 1
    tolerance = spacing * 1e-9
    while grid[-1] + spacing <= hi + tolerance:
        grid.append(float(lo + step * spacing))
        step += 1
    if hi - grid[-1] > tolerance:
        grid.append(float(hi))
    else:
        grid[-1] = float(hi)
    return grid


@dataclass
class Curve:
    axis: str  # "cost" or "k"
    xs: list[float]
    ys: list[float]
    y_semantics: str  # "coverage_fraction" or "min_max_cost"


@dataclass
class AucResult:
    value: float  # normalized to [0, 1]
    raw_area: float
    saturation_point: float
    extremum: float  # plateau coverage (kAUC/dAUC) or plateau cost (cAUC)
    curve: Curve
    method_tag: str
    excluded_xs: list[float] = field(default_factory=list)


@dataclass
class MinResources:
    k0: int
    d0: float
    per_wcc: list[tuple[int, int, float]]  # (component id, k0_i, d0_i)
    method_tag: str
    solutions: dict[int, Solution] = field(default_factory=dict)


def _trapezoid(xs: list[float], ys: list[float]) -> float:
    area = 0.0
    for i in range(1, len(xs)):
        area += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1])
    return area


def min_resources(
    problem: SelectionProblem,
    wcc: WccIndex,
    method: str = "exact",
    cap: int = DEFAULT_EXACT_CAP,
) -> MinResources:
    """Minimum counterfactual count (k0) and min-max cost (d0) for full coverage.

    Computed component-wise: k0 sums the per-component minimum cover sizes and
    d0 is the worst per-component min-max cost at those sizes. Factuals without
    reachable candidates must have been excluded beforehand.
    """
    subs = {cid: sub for cid, sub in component_problems(problem, wcc).items() if sub.factuals}
    per_wcc: list[tuple[int, int, float]] = []
    solutions: dict[int, Solution] = {}
    used_greedy = False
    for cid, sub in sorted(subs.items()):
        size = _full_cover_size(sub, method, cap)
        exact_ok = method == "exact" and len(sub.candidates) <= cap
        used_greedy = used_greedy or not exact_ok
        solution = _kcenter_at(sub, len(sub.factuals), size, method, cap)
        per_wcc.append((cid, size, solution.max_cost))
        solutions[cid] = solution
    k0 = sum(entry[1] for entry in per_wcc)
    d0 = max((entry[2] for entry in per_wcc), default=0.0)
    return MinResources(
        k0=k0,
        d0=d0,
        per_wcc=per_wcc,
        method_tag="greedy" if used_greedy else "exact",
        solutions=solutions,
    )


def best_coverage_set(
    problem: SelectionProblem,
    k: int,
    d: float,
    method: str = "auto",
    cap: int = DEFAULT_EXACT_CAP,
) -> Solution:
    """Best coverage within budget k and cost bound d; exact within the cap."""
    if k < 1:
        raise UsageError("budget k must be at least 1")
    if d <= 0:
        raise UsageError("cost bound d must be positive")
    scoped = problem.with_budget(k)
    if method == "exact" or (method == "auto" and len(problem.candidates) <= cap):
        return exact_max_coverage(scoped, d, cap)
    return greedy_max_coverage(scoped, d)


def _coverage_fraction(problem: SelectionProblem, solution: Solution) -> float:
    if not problem.factuals:
        return 0.0
    return solution.coverage_count / len(problem.factuals)


def _plateau_start(xs: list[float], ys: list[float]) -> float:
    """Smallest grid x from which y stays exactly at its final value."""
    final = ys[-1]
    start = xs[-1]
    for x, y in zip(reversed(xs), reversed(ys)):
        if y == final:
            start = x
        else:
            break
    return start


def _coverage_auc(
    problem: SelectionProblem,
    axis: str,
    xs: list[float],
    coverages: list[float],
    method_tag: str,
) -> AucResult:
    raw = _trapezoid(xs, coverages)
    best = max(coverages) if coverages else 0.0
    optimal = _trapezoid(xs, [best] * len(xs))
    value = 0.0 if optimal == 0.0 else raw / optimal
    sp = _plateau_start(xs, coverages)
    return AucResult(
        value=value,
        raw_area=raw,
        saturation_point=sp,
        extremum=coverages[-1] if coverages else 0.0,
        curve=Curve(axis=axis, xs=xs, ys=coverages, y_semantics="coverage_fraction"),
        method_tag=method_tag,
    )


def k_auc(
    problem: SelectionProblem,
    k: int,
    d_range: tuple[float, float],
    steps: int = 12,
    method: str = "auto",
    cap: int = DEFAULT_EXACT_CAP,
) -> AucResult:
    """Normalized area under coverage-vs-cost at a fixed budget k.

    The optimal baseline holds coverage at the best value attained anywhere on
    the grid, so a flat maximal curve scores exactly 1.0 and saturates at the
    smallest grid cost.
    """
    d_min, d_max = d_range
    if not d_min < d_max:
        raise UsageError("d_range needs d_min < d_max")
    if steps < 2:
        raise UsageError("steps must be at least 2")
    xs = nice_grid(d_min, d_max, steps)
    solutions = [best_coverage_set(problem, k, d, method, cap) for d in xs]
    coverages = [_coverage_fraction(problem, s) for s in solutions]
    tag = solutions[0].method_tag if solutions else "exact"
    return _coverage_auc(problem, "cost", xs, coverages, tag)


def d_auc(
    problem: SelectionProblem,
    d: float,
    k_range: tuple[int, int],
    steps: int = 12,
    method: str = "auto",
    cap: int = DEFAULT_EXACT_CAP,
) -> AucResult:
    """Normalized area under coverage-vs-k at a fixed cost bound d."""
    k_min, k_max = k_range
    if not 1 <= k_min < k_max:
        raise UsageError("k_range needs 1 <= k_min < k_max")
    if d <= 0:
        raise UsageError("cost bound d must be positive")
    xs = nice_grid(k_min, k_max, steps, integer=True)
    solutions = [best_coverage_set(problem, int(k), d, method, cap) for k in xs]
    coverages = [_coverage_fraction(problem, s) for s in solutions]
    tag = solutions[0].method_tag if solutions else "exact"
    return _coverage_auc(problem, "k", xs, coverages, tag)


def c_auc(
    problem: SelectionProblem,
    c: float,
    k_range: tuple[int, int],
    steps: int = 25,
    method: str = "auto",
    cap: int = DEFAULT_EXACT_CAP,
) -> AucResult:
    """Normalized area under min-max-cost-vs-k at a fixed coverage level.

    Budgets whose target coverage is infeasible are excluded from the curve
    and listed on the result; the score divides by the constant curve at the
    largest realized cost, so lower values are better.
    """
    if not 0 < c <= 1:
        raise UsageError("coverage fraction c must be in (0, 1]")
    k_min, k_max = k_range
    if not 1 <= k_min <= k_max:
        raise UsageError("k_range needs 1 <= k_min <= k_max")
    from .solvers import required_count

    n_required = required_count(c, len(problem.factuals))
    xs_all = (
        nice_grid(k_min, k_max, steps, integer=True) if k_min < k_max else [float(k_min)]
    )
    use_exact = method == "exact" or (method == "auto" and len(problem.candidates) <= cap)
    xs: list[float] = []
    costs: list[float] = []
    excluded: list[float] = []
    tag = "exact" if use_exact else "greedy"
    for k in xs_all:
        scoped = problem.with_budget(int(k))
        try:
            if use_exact:
                solution = exact_kcenter_count(scoped, n_required, cap)
            else:
                solution = _greedy_kcenter_count(scoped, n_required)
            xs.append(float(k))
            costs.append(solution.max_cost)
        except InfeasibleError:
            excluded.append(float(k))
    if not xs:
        raise InfeasibleError(f"coverage {c} infeasible at every budget up to {k_max}")
    if excluded and excluded[-1] == float(k_max):
        raise InfeasibleError(f"coverage {c} infeasible at k_max={k_max}")
    raw = _trapezoid(xs, costs)
    worst = max(costs)
    optimal = _trapezoid(xs, [worst] * len(xs))
    value = 0.0 if optimal == 0.0 else raw / optimal
    sp = _plateau_start(xs, costs)
    return AucResult(
        value=value,
        raw_area=raw,
        saturation_point=sp,
        extremum=costs[-1],
        curve=Curve(axis="k", xs=xs, ys=costs, y_semantics="min_max_cost"),
        method_tag=tag,
        excluded_xs=excluded,
    )


def acf(matrix: EncodedMatrix, solution: Solution, attribute: str) -> float:
    """Fraction of assigned factuals whose counterfactual differs on the attribute.

    Comparison spans the attribute's full encoded range, so one-hot categories
    count as changed when any of their columns differ. Factuals not covered by
    the solution are excluded (callers report them separately).
    """
    attr = matrix.attribute(attribute)
    if attr.encoded_span is None:
        raise UsageError(f"attribute {attribute!r} has no encoded span")
    start, stop = attr.encoded_span
    if not solution.assignment:
        return 0.0
    changed = 0
    for factual, (candidate, _cost) in solution.assignment.items():
        a = matrix.values[factual, start:stop]
        b = matrix.values[candidate, start:stop]
        if not np.array_equal(a, b):
            changed += 1
    return changed / len(solution.assignment)


@dataclass
class AcfReport:
    population: str
    frequencies: dict[str, float]
    n_assigned: int
    n_excluded: int


def acf_report(
    matrix: EncodedMatrix,
    problem: SelectionProblem,
    solution: Solution,
    population: str,
) -> AcfReport:
    """ACF for every attribute over one population (group or component)."""
    return AcfReport(
        population=population,
        frequencies={
            attr.name: acf(matrix, solution, attr.name) for attr in matrix.schema
        },
        n_assigned=len(solution.assignment),
        n_excluded=len(problem.factuals) - len(solution.assignment),
    )
