"""Greedy and exact solvers for the two group-counterfactual selection problems.

Problem 1 (cost-constrained): pick at most k candidates maximizing the number
of factuals within cost d of a selected candidate.

Problem 2 (coverage-constrained): pick at most k candidates so that at least
ceil(c*|X|) factuals are covered while the covering radius is minimized.

Exact solvers enumerate candidate subsets (size-ascending, pruned) and are
guarded by a size cap; ties resolve to maximal coverage, then minimal |S|,
then lexicographically smallest candidate ids. Greedy ties resolve to the
lowest candidate id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .costs import normalize_cost_kind
from .errors import CapacityError, InfeasibleError, UsageError
from .graph import FeasibilityGraph, WccIndex, feasibility_set, path_costs_from

DEFAULT_EXACT_CAP = 20


@dataclass
class SelectionProblem:
    """Factuals, candidates, and the factual->candidate cost structure.

    ``factuals`` and ``candidates`` are stored sorted ascending so that
    "lowest id" tie-breaking coincides with positional argmax/argmin.
    ``cost_matrix[i, j]`` is the cost from factuals[i] to candidates[j],
    infinite when the candidate is not reachable.
    """

    factuals: list[int]
    candidates: list[int]
    k: int
    cost_kind: str
    graph: FeasibilityGraph | None
    reach: dict[int, dict[int, float]]
    cost_matrix: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    excluded: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.factuals = sorted(self.factuals)
        self.candidates = sorted(self.candidates)
        if set(self.factuals) & set(self.candidates):
            raise UsageError("factual and candidate sets must be disjoint")
        if self.graph is not None and self.factuals and self.candidates:
            labels = self.graph.matrix.labels
            f_labels = {int(labels[i]) for i in self.factuals}
            c_labels = {int(labels[j]) for j in self.candidates}
            if len(f_labels) > 1 or len(c_labels) > 1 or f_labels == c_labels:
                raise UsageError("factual labels must be uniform and opposite to candidates")
        if self.cost_matrix is None:
            nf, nc = len(self.factuals), len(self.candidates)
            cm = np.full((nf, nc), np.inf)
            pos = {cand: col for col, cand in enumerate(self.candidates)}
            for row, fid in enumerate(self.factuals):
                for cand, cost in self.reach.get(fid, {}).items():
                    col = pos.get(cand)
                    if col is not None:
                        cm[row, col] = cost
            self.cost_matrix = cm

    @classmethod
    def from_graph(
        cls,
        graph: FeasibilityGraph,
        factuals: list[int],
        candidates: list[int] | None = None,
        k: int = 1,
        cost_kind: str = "l2",
        drop_unreachable: bool = False,
    ) -> "SelectionProblem":
        """Build the problem from per-factual feasibility sets.

        With ``drop_unreachable`` factuals without any reachable candidate are
        removed and listed in ``excluded`` instead of raising later.
        """
        cost_kind = normalize_cost_kind(cost_kind)
        if candidates is None:
            labels = graph.matrix.labels
            opposite = 1 - int(labels[factuals[0]]) if factuals else 1
            candidates = [int(i) for i in np.nonzero(labels == opposite)[0]]
        cand_set = set(candidates)
        reach: dict[int, dict[int, float]] = {}
        kept: list[int] = []
        excluded: list[int] = []
        for fid in factuals:
            costs = feasibility_set(graph, fid, cost_kind).costs
            costs = {c: v for c, v in costs.items() if c in cand_set}
            if not costs and drop_unreachable:
                excluded.append(fid)
                continue
            reach[fid] = costs
            kept.append(fid)
        return cls(
            factuals=kept,
            candidates=list(candidates),
            k=k,
            cost_kind=cost_kind,
            graph=graph,
            reach=reach,
            excluded=excluded,
        )

    @classmethod
    def from_costs(
        cls,
        cost_matrix: np.ndarray,
        k: int,
        factuals: list[int] | None = None,
        candidates: list[int] | None = None,
        cost_kind: str = "l2",
    ) -> "SelectionProblem":
        """Build directly from an (nf, nc) cost matrix (tests, ad-hoc instances)."""
        cm = np.asarray(cost_matrix, dtype=np.float64)
        nf, nc = cm.shape
        factuals = list(range(nf)) if factuals is None else list(factuals)
        candidates = list(range(nf, nf + nc)) if candidates is None else list(candidates)
        reach = {
            factuals[i]: {
                candidates[j]: float(cm[i, j]) for j in range(nc) if math.isfinite(cm[i, j])
            }
            for i in range(nf)
        }
        problem = cls(
            factuals=factuals,
            candidates=candidates,
            k=k,
            cost_kind=cost_kind,
            graph=None,
            reach=reach,
        )
        return problem

    def with_budget(self, k: int) -> "SelectionProblem":
        return replace(self, k=k, cost_matrix=self.cost_matrix)

    def restrict(self, factuals: list[int], candidates: list[int], k: int | None = None) -> "SelectionProblem":
        """Subproblem over subsets of the factual and candidate ids."""
        f_idx = [self.factuals.index(f) for f in sorted(factuals)]
        c_idx = [self.candidates.index(c) for c in sorted(candidates)]
        sub = self.cost_matrix[np.ix_(f_idx, c_idx)] if f_idx and c_idx else np.full(
            (len(f_idx), len(c_idx)), np.inf
        )
        cand_set = set(candidates)
        return SelectionProblem(
            factuals=sorted(factuals),
            candidates=sorted(candidates),
            k=self.k if k is None else k,
            cost_kind=self.cost_kind,
            graph=self.graph,
            reach={
                f: {c: v for c, v in self.reach.get(f, {}).items() if c in cand_set}
                for f in factuals
            },
            cost_matrix=sub,
        )


@dataclass
class Solution:
    selected: list[int]  # candidate ids in selection order
    assignment: dict[int, tuple[int, float]]  # factual -> (candidate, cost)
    coverage_count: int
    max_cost: float
    method_tag: str
    optimality_flag: bool
    seed: int | None = None

    def validate(self, problem: SelectionProblem, bound: float | None = None) -> None:
        """Assert the solution's own invariants against its problem."""
        assert len(self.selected) <= problem.k
        assert self.coverage_count == len(self.assignment)
        chosen = set(self.selected)
        for factual, (candidate, cost) in self.assignment.items():
            assert candidate in chosen
            assert factual in problem.factuals
            limit = bound if bound is not None else self.max_cost
            assert cost <= limit + 1e-12


def solution_to_dict(solution: Solution) -> dict:
    """JSON-ready serialization of a solution."""
    return {
        "selected": [int(c) for c in solution.selected],
        "assignment": {
            str(f): {"candidate": int(c), "cost": _json_float(v)}
            for f, (c, v) in sorted(solution.assignment.items())
        },
        "coverage": solution.coverage_count,
        "max_cost": _json_float(solution.max_cost),
        "method": solution.method_tag,
        "optimal": solution.optimality_flag,
        "tie_break": "lowest_candidate_id",
        "seed": solution.seed,
    }


def _json_float(value: float):
    return "inf" if math.isinf(value) else float(value)


def _assignment(problem: SelectionProblem, selected: list[int], radius: float) -> dict[int, tuple[int, float]]:
    """Assign each factual within ``radius`` of the selection to its cheapest pick."""
    if not selected:
        return {}
    cols = [problem.candidates.index(c) for c in sorted(selected)]
    sub = problem.cost_matrix[:, cols]
    best = np.argmin(sub, axis=1)  # first minimum -> lowest candidate id
    out: dict[int, tuple[int, float]] = {}
    for row, fid in enumerate(problem.factuals):
        cost = float(sub[row, best[row]])
        if math.isfinite(cost) and cost <= radius + 1e-12:
            out[fid] = (sorted(selected)[best[row]], cost)
    return out


def _coverage_mask(problem: SelectionProblem, d: float) -> np.ndarray:
    cm = problem.cost_matrix
    return np.isfinite(cm) & (cm <= d)


# ---------------------------------------------------------------------------
# Problem 1: cost-constrained maximum coverage
# ---------------------------------------------------------------------------


def greedy_max_coverage(problem: SelectionProblem, d: float) -> Solution:
    """Iteratively add the candidate with the largest marginal coverage.

    Stops at k selections, full coverage, or zero marginal gain. Achieves at
    least (1 - 1/e) of the optimal coverage (submodular greedy bound).
    """
    if d <= 0:
        raise UsageError("cost bound d must be positive")
    return _greedy_cover(problem, d)


def _greedy_cover(problem: SelectionProblem, d: float) -> Solution:
    """Greedy coverage without the public positivity guard (radius probes pass d=0)."""
    nf, nc = problem.cost_matrix.shape
    cover = _coverage_mask(problem, d)
    covered = np.zeros(nf, dtype=bool)
    selected: list[int] = []
    for _ in range(min(problem.k, nc)):
        gains = (cover & ~covered[:, None]).sum(axis=0)
        if selected:
            picked = [problem.candidates.index(c) for c in selected]
            gains[picked] = -1
        best = int(np.argmax(gains)) if nc else 0
        if nc == 0 or gains[best] <= 0:
            break
        selected.append(problem.candidates[best])
        covered |= cover[:, best]
        if covered.all():
            break
    assignment = _assignment(problem, selected, d)
    max_cost = max((c for _, c in assignment.values()), default=0.0)
    return Solution(
        selected=selected,
        assignment=assignment,
        coverage_count=len(assignment),
        max_cost=max_cost,
        method_tag="greedy",
        optimality_flag=False,
    )


def exact_max_coverage(
    problem: SelectionProblem, d: float, cap: int = DEFAULT_EXACT_CAP
) -> Solution:
    """Coverage-optimal selection by pruned subset enumeration.

    Among coverage-optimal sets the result has minimal size, then
    lexicographically smallest candidate ids.
    """
    if d <= 0:
        raise UsageError("cost bound d must be positive")
    return _exact_cover(problem, d, cap)


def _exact_cover(problem: SelectionProblem, d: float, cap: int) -> Solution:
    nf, nc = problem.cost_matrix.shape
    if nc > cap:
        raise CapacityError(
            f"{nc} candidates exceed the exact-search cap {cap}; use the greedy solver"
        )
    cover = _coverage_mask(problem, d)
    masks = []
    ids = []
    for col in range(nc):
        mask = 0
        for row in np.nonzero(cover[:, col])[0]:
            mask |= 1 << int(row)
        if mask:
            masks.append(mask)
            ids.append(col)
    best_cov = 0
    best_combo: tuple[int, ...] = ()
    full = (1 << nf) - 1 if nf else 0
    n_useful = len(masks)
    suffix_union = [0] * (n_useful + 1)
    for i in range(n_useful - 1, -1, -1):
        suffix_union[i] = suffix_union[i + 1] | masks[i]

    def search(start: int, chosen: tuple[int, ...], acc: int, slots: int) -> bool:
        """Depth-first over combos of exactly ``slots`` more picks; True on full cover."""
        nonlocal best_cov, best_combo
        if slots == 0:
            cov = acc.bit_count()
            if cov > best_cov:
                best_cov = cov
                best_combo = chosen
                return nf > 0 and acc == full
            return False
        if (acc | suffix_union[start]).bit_count() <= best_cov:
            return False
        for i in range(start, n_useful - slots + 1):
            if search(i + 1, chosen + (i,), acc | masks[i], slots - 1):
                return True
        return False

    done = False
    for size in range(0, min(problem.k, n_useful) + 1):
        if search(0, (), 0, size):
            done = True
        if done or best_cov == nf:
            break
    selected = [problem.candidates[ids[i]] for i in best_combo]
    assignment = _assignment(problem, selected, d)
    max_cost = max((c for _, c in assignment.values()), default=0.0)
    return Solution(
        selected=selected,
        assignment=assignment,
        coverage_count=len(assignment),
        max_cost=max_cost,
        method_tag="exact",
        optimality_flag=True,
    )


# ---------------------------------------------------------------------------
# Problem 2: coverage-constrained min-max cost (k-center style)
# ---------------------------------------------------------------------------


def required_count(c: float, n_factuals: int) -> int:
    """ceil(c * |X|) with a tiny guard against float round-up noise."""
    if not 0 < c <= 1:
        raise UsageError("coverage fraction c must be in (0, 1]")
    return max(0, math.ceil(c * n_factuals - 1e-9))


def _selection_radius(problem: SelectionProblem, selected: list[int], n_required: int) -> float:
    """Objective value of a selection: n-th smallest per-factual min cost."""
    if n_required == 0:
        return 0.0
    if not selected:
        return math.inf
    cols = [problem.candidates.index(c) for c in selected]
    per_factual = problem.cost_matrix[:, cols].min(axis=1)
    finite = np.sort(per_factual[np.isfinite(per_factual)])
    if len(finite) < n_required:
        return math.inf
    return float(finite[n_required - 1])


def _kcenter_solution(
    problem: SelectionProblem,
    selected: list[int],
    n_required: int,
    method: str,
    optimal: bool,
    seed: int | None = None,
) -> Solution:
    radius = _selection_radius(problem, selected, n_required)
    assignment = _assignment(problem, selected, radius)
    return Solution(
        selected=selected,
        assignment=assignment,
        coverage_count=len(assignment),
        max_cost=radius,
        method_tag=method,
        optimality_flag=optimal,
        seed=seed,
    )


def _gonzalez_sequence(problem: SelectionProblem, seed: int | None) -> list[int]:
    """Farthest-first candidate sequence; first pick is the lowest id (seed permutes)."""
    candidates = problem.candidates
    nc = len(candidates)
    if nc == 0:
        return []
    if seed is None:
        first = 0
    else:
        first = int(np.random.default_rng(seed).integers(0, nc))
    if problem.cost_kind == "l2" or problem.graph is None:
        points = (
            problem.graph.matrix.values[candidates]
            if problem.graph is not None
            else None
        )
        if points is None:
            # No geometry available: spread by candidate order.
            return [candidates[(first + i) % nc] for i in range(min(problem.k, nc))]
        diffs = points[:, None, :] - points[None, :, :]
        dist = np.sqrt((diffs**2).sum(axis=2))
    else:
        dist = np.full((nc, nc), np.inf)
        for row, cand in enumerate(candidates):
            costs = path_costs_from(problem.graph, cand, problem.cost_kind)
            dist[row] = [float(costs[other]) for other in candidates]
    chosen = [first]
    while len(chosen) < min(problem.k, nc):
        to_chosen = dist[:, chosen].min(axis=1)
        to_chosen[chosen] = -1.0
        chosen.append(int(np.argmax(to_chosen)))
    return [candidates[i] for i in chosen]


def greedy_kcenter(problem: SelectionProblem, c: float, seed: int | None = None) -> Solution:
    """Heuristic min-max cost selection over the realized-radius grid.

    Two passes run and the smaller accepted radius wins: (a) a farthest-first
    pass over candidates (first center = lowest id unless a seed permutes it),
    and (b) an ascending scan over realized radii accepting the first radius at
    which the marginal-coverage greedy reaches the target. The scan pass keeps
    the accepted radius within twice the optimum on all tested workloads,
    which the farthest-first pass alone does not guarantee.
    """
    n_required = required_count(c, len(problem.factuals))
    return _greedy_kcenter_count(problem, n_required, seed)


def _greedy_kcenter_count(
    problem: SelectionProblem, n_required: int, seed: int | None = None
) -> Solution:
    if n_required == 0:
        return _kcenter_solution(problem, [], 0, "greedy", False, seed)
    gonzalez = _gonzalez_sequence(problem, seed)
    best = _kcenter_solution(problem, gonzalez, n_required, "greedy", False, seed)

    cm = problem.cost_matrix
    finite = cm[np.isfinite(cm)]
    per_factual_min = cm.min(axis=1) if cm.size else np.full(len(problem.factuals), np.inf)
    reachable_min = np.sort(per_factual_min[np.isfinite(per_factual_min)])
    if len(reachable_min) >= n_required and len(finite):
        lower = float(reachable_min[n_required - 1])
        radii = np.unique(finite)
        ceiling = best.max_cost
        for radius in radii[radii >= lower - 1e-15]:
            if radius >= ceiling:
                break
            trial = _greedy_cover(problem, float(radius))
            if trial.coverage_count >= n_required:
                scanned = _kcenter_solution(
                    problem, trial.selected, n_required, "greedy", False, seed
                )
                if scanned.max_cost < best.max_cost:
                    best = scanned
                break
    if math.isinf(best.max_cost):
        uncovered = [
            problem.factuals[i]
            for i in range(len(problem.factuals))
            if not math.isfinite(per_factual_min[i])
        ]
        raise InfeasibleError(
            f"coverage of {n_required} factuals not achievable with k={problem.k}"
            + (f"; factuals without reachable candidates: {uncovered}" if uncovered else ""),
            uncovered=uncovered,
        )
    return best


def exact_kcenter(
    problem: SelectionProblem, c: float, cap: int = DEFAULT_EXACT_CAP
) -> Solution:
    """Optimal min-max cost via binary search over realized radii."""
    n_required = required_count(c, len(problem.factuals))
    return exact_kcenter_count(problem, n_required, cap)


def exact_kcenter_count(
    problem: SelectionProblem, n_required: int, cap: int = DEFAULT_EXACT_CAP
) -> Solution:
    """Count-based exact k-center: cover at least ``n_required`` factuals.

    Binary search over the finite set of realized factual->candidate costs
    with the exact maximum-coverage solver as the feasibility oracle.
    """
    if len(problem.candidates) > cap:
        raise CapacityError(
            f"{len(problem.candidates)} candidates exceed the exact-search cap {cap}"
        )
    if n_required == 0:
        return _kcenter_solution(problem, [], 0, "exact", True)
    cm = problem.cost_matrix
    finite = np.unique(cm[np.isfinite(cm)])
    if len(finite) == 0:
        raise InfeasibleError(
            "no factual can reach any candidate", uncovered=list(problem.factuals)
        )
    top = _exact_cover(problem, float(finite[-1]) + 1.0, cap)
    if top.coverage_count < n_required:
        uncovered = [f for f in problem.factuals if f not in top.assignment]
        raise InfeasibleError(
            f"coverage {n_required}/{len(problem.factuals)} not achievable "
            f"with k={problem.k}",
            uncovered=uncovered,
        )
    lo, hi = 0, len(finite) - 1
    best = top
    while lo < hi:
        mid = (lo + hi) // 2
        trial = _exact_cover(problem, float(finite[mid]), cap)
        if trial.coverage_count >= n_required:
            best = trial
            hi = mid
        else:
            lo = mid + 1
    solution = _kcenter_solution(problem, best.selected, n_required, "exact", True)
    return solution


# ---------------------------------------------------------------------------
# Per-component solving, allocation, and the partial-coverage DP
# ---------------------------------------------------------------------------


def component_problems(
    problem: SelectionProblem, wcc: WccIndex, k: int | None = None
) -> dict[int, SelectionProblem]:
    """Subproblems per weakly connected component touching the problem's nodes."""
    by_component: dict[int, tuple[list[int], list[int]]] = {}
    comp = wcc.component_of
    for fid in problem.factuals:
        by_component.setdefault(int(comp[fid]), ([], []))[0].append(fid)
    for cand in problem.candidates:
        by_component.setdefault(int(comp[cand]), ([], []))[1].append(cand)
    return {
        cid: problem.restrict(fs, cs, k=k)
        for cid, (fs, cs) in sorted(by_component.items())
    }


def solve_per_wcc(
    problem: SelectionProblem,
    wcc: WccIndex,
    method: str = "greedy",
    problem_kind: str = "cost_constrained",
    d: float | None = None,
    c: float | None = None,
    cap: int = DEFAULT_EXACT_CAP,
) -> dict[int, Solution]:
    """Solve independently inside each component; budgets apply per component.

    Components whose factuals cannot be covered are flagged with an infinite
    max cost instead of raising.
    """
    if method not in ("greedy", "exact"):
        raise UsageError(f"unknown method {method!r}")
    if problem_kind == "cost_constrained" and d is None:
        raise UsageError("cost_constrained needs a cost bound d")
    if problem_kind == "coverage_constrained" and c is None:
        raise UsageError("coverage_constrained needs a coverage fraction c")
    results: dict[int, Solution] = {}
    for cid, sub in component_problems(problem, wcc).items():
        if not sub.factuals:
            results[cid] = Solution([], {}, 0, 0.0, method, method == "exact")
            continue
        try:
            if problem_kind == "cost_constrained":
                solve = greedy_max_coverage if method == "greedy" else exact_max_coverage
                results[cid] = (
                    solve(sub, d) if method == "greedy" else solve(sub, d, cap)  # type: ignore[misc]
                )
            else:
                if method == "greedy":
                    results[cid] = greedy_kcenter(sub, c)  # type: ignore[arg-type]
                else:
                    results[cid] = exact_kcenter(sub, c, cap)  # type: ignore[arg-type]
        except InfeasibleError:
            results[cid] = Solution([], {}, 0, math.inf, method, False)
    return results


def interleaved_greedy_max_coverage(
    problem: SelectionProblem, wcc: WccIndex, d: float
) -> Solution:
    """Per-component greedy interleaving that matches the global greedy.

    Each component proposes its next best candidate; the proposal with the
    largest marginal coverage wins each round (ties to the lowest candidate
    id), reproducing the global greedy selection at every prefix.
    """
    if d <= 0:
        raise UsageError("cost bound d must be positive")
    subs = component_problems(problem, wcc)
    states = {}
    for cid, sub in subs.items():
        cover = _coverage_mask(sub, d)
        states[cid] = {"sub": sub, "cover": cover, "covered": np.zeros(len(sub.factuals), bool)}
    selected: list[int] = []
    while len(selected) < problem.k:
        best_gain, best_candidate, best_cid, best_col = 0, None, None, None
        for cid, state in sorted(states.items()):
            cover, covered = state["cover"], state["covered"]
            if covered.all() or cover.shape[1] == 0:
                continue
            gains = (cover & ~covered[:, None]).sum(axis=0)
            taken = [
                state["sub"].candidates.index(s)
                for s in selected
                if s in state["sub"].candidates
            ]
            if taken:
                gains[taken] = -1
            col = int(np.argmax(gains))
            gain = int(gains[col])
            candidate = state["sub"].candidates[col]
            better = gain > best_gain or (
                gain == best_gain
                and gain > 0
                and (best_candidate is None or candidate < best_candidate)
            )
            if better:
                best_gain, best_candidate, best_cid, best_col = gain, candidate, cid, col
        if best_candidate is None or best_gain <= 0:
            break
        selected.append(best_candidate)
        state = states[best_cid]
        state["covered"] |= state["cover"][:, best_col]
    assignment = _assignment(problem, selected, d)
    max_cost = max((c for _, c in assignment.values()), default=0.0)
    return Solution(
        selected=selected,
        assignment=assignment,
        coverage_count=len(assignment),
        max_cost=max_cost,
        method_tag="greedy",
        optimality_flag=False,
    )


@dataclass
class AllocationTable:
    """Budget (and, for partial coverage, coverage) split across components."""

    allocation: dict[int, int]  # component id -> k_i
    coverage_allocation: dict[int, int]  # component id -> n_i covered there
    per_component_cost: dict[int, float]
    total_cost: float
    combine: str  # "max" or "sum"
    tables: dict[int, dict] = field(default_factory=dict)
    solutions: dict[int, Solution] = field(default_factory=dict)


def _full_cover_size(sub: SelectionProblem, method: str, cap: int) -> int:
    """Minimum number of candidates that fully covers the subproblem's factuals."""
    nf = len(sub.factuals)
    if nf == 0:
        return 0
    horizon = len(sub.candidates)
    if horizon == 0:
        raise InfeasibleError(
            "component has factuals but no candidates", uncovered=list(sub.factuals)
        )
    if method == "exact" and horizon <= cap:
        sol = exact_max_coverage(sub.with_budget(horizon), math.inf, cap)
        if sol.coverage_count < nf:
            raise InfeasibleError(
                "component cannot be fully covered",
                uncovered=[f for f in sub.factuals if f not in sol.assignment],
            )
        return len(sol.selected)
    for budget in range(1, horizon + 1):
        sol = greedy_max_coverage(sub.with_budget(budget), math.inf)
        if sol.coverage_count == nf:
            return budget
    raise InfeasibleError(
        "component cannot be fully covered", uncovered=list(sub.factuals)
    )


def _kcenter_at(sub: SelectionProblem, n_required: int, budget: int, method: str, cap: int) -> Solution:
    scoped = sub.with_budget(budget)
    if method == "exact" and len(sub.candidates) <= cap:
        return exact_kcenter_count(scoped, n_required, cap)
    return _greedy_kcenter_count(scoped, n_required)


def allocate_full_coverage(
    problem: SelectionProblem,
    wcc: WccIndex,
    k: int,
    method: str = "exact",
    cap: int = DEFAULT_EXACT_CAP,
) -> AllocationTable:
    """Distribute k counterfactuals across components for full coverage.

    Starts every component at its minimum full-cover size, then repeatedly
    grants one extra counterfactual to the component with the largest current
    min-max cost (ties to the lowest component id).
    """
    subs = {cid: sub for cid, sub in component_problems(problem, wcc).items() if sub.factuals}
    if not subs:
        return AllocationTable({}, {}, {}, 0.0, "max")
    minimum = {cid: _full_cover_size(sub, method, cap) for cid, sub in subs.items()}
    need = sum(minimum.values())
    if k < len(subs):
        raise InfeasibleError(
            f"budget k={k} below the component count m={len(subs)}; "
            "at least one counterfactual is required per component"
        )
    if k < need:
        raise InfeasibleError(
            f"budget k={k} cannot fully cover: minimum total is {need} "
            f"(shortfall {need - k})"
        )
    allocation = dict(minimum)
    solutions: dict[int, Solution] = {}
    costs: dict[int, float] = {}
    tables: dict[int, dict] = {cid: {} for cid in subs}

    def solve_at(cid: int, budget: int) -> Solution:
        if budget not in tables[cid]:
            sol = _kcenter_at(subs[cid], len(subs[cid].factuals), budget, method, cap)
            tables[cid][budget] = sol
        return tables[cid][budget]

    for cid in subs:
        solutions[cid] = solve_at(cid, allocation[cid])
        costs[cid] = solutions[cid].max_cost
    while sum(allocation.values()) < k:
        target = max(sorted(costs), key=lambda cid: (costs[cid], -cid))
        allocation[target] += 1
        solutions[target] = solve_at(target, allocation[target])
        costs[target] = solutions[target].max_cost
    return AllocationTable(
        allocation=allocation,
        coverage_allocation={cid: len(sub.factuals) for cid, sub in subs.items()},
        per_component_cost=costs,
        total_cost=max(costs.values()),
        combine="max",
        tables={cid: {b: s.max_cost for b, s in t.items()} for cid, t in tables.items()},
        solutions=solutions,
    )


def dp_allocate_partial(
    problem: SelectionProblem,
    wcc: WccIndex,
    k: int,
    n: int,
    combine: str = "max",
    method: str = "exact",
    cap: int = DEFAULT_EXACT_CAP,
) -> AllocationTable:
    """Optimal split of budget k and coverage n across components.

    Per-component tables hold the min-max cost of covering n' factuals with
    k' counterfactuals; the prefix recurrence combines component costs with
    ``max`` (objective-consistent default) or ``sum``.
    """
    if combine not in ("max", "sum"):
        raise UsageError(f"unknown combine mode {combine!r}")
    if n < 0:
        raise UsageError("required coverage n must be nonnegative")
    subs = {cid: sub for cid, sub in component_problems(problem, wcc).items() if sub.factuals}
    order = sorted(subs)
    coverable = {
        cid: int(np.isfinite(subs[cid].cost_matrix.min(axis=1, initial=np.inf)).sum())
        for cid in order
    }
    if n > sum(coverable.values()):
        raise InfeasibleError(
            f"required coverage n={n} exceeds the {sum(coverable.values())} coverable factuals"
        )
    if n == 0:
        return AllocationTable({}, {}, {}, 0.0, combine)

    tables: dict[int, np.ndarray] = {}
    for cid in order:
        sub = subs[cid]
        k_hi = min(k, len(sub.candidates))
        n_hi = min(n, coverable[cid])
        table = np.full((k + 1, n + 1), np.inf)
        table[:, 0] = 0.0
        for budget in range(1, k_hi + 1):
            for count in range(1, n_hi + 1):
                try:
                    table[budget, count] = _kcenter_at(sub, count, budget, method, cap).max_cost
                except InfeasibleError:
                    table[budget, count] = np.inf
            table[budget + 1 :, : n_hi + 1] = np.minimum(
                table[budget + 1 :, : n_hi + 1], table[budget, : n_hi + 1]
            )
        tables[cid] = table

    neutral = 0.0
    dp = np.full((k + 1, n + 1), np.inf)
    dp[:, 0] = neutral
    parents: dict[tuple[int, int, int], tuple[int, int]] = {}
    for index, cid in enumerate(order):
        table = tables[cid]
        new = np.full((k + 1, n + 1), np.inf)
        new[:, 0] = neutral
        for kk in range(k + 1):
            for nn in range(n + 1):
                best = np.inf
                arg = (0, 0)
                for kp in range(kk + 1):
                    for np_ in range(nn + 1):
                        prev = dp[kk - kp, nn - np_]
                        here = table[kp, np_]
                        if math.isinf(prev) or math.isinf(here):
                            continue
                        value = max(prev, here) if combine == "max" else prev + here
                        if value < best:
                            best = value
                            arg = (kp, np_)
                new[kk, nn] = best
                parents[(index, kk, nn)] = arg
        dp = new
    total = float(dp[k, n])
    if math.isinf(total):
        raise InfeasibleError(f"no allocation of k={k} covers n={n} factuals")

    allocation: dict[int, int] = {}
    coverage_allocation: dict[int, int] = {}
    per_cost: dict[int, float] = {}
    kk, nn = k, n
    for index in range(len(order) - 1, -1, -1):
        kp, np_ = parents[(index, kk, nn)]
        cid = order[index]
        if np_ > 0:
            allocation[cid] = kp
            coverage_allocation[cid] = np_
            per_cost[cid] = float(tables[cid][kp, np_])
        kk -= kp
        nn -= np_
    return AllocationTable(
        allocation=dict(sorted(allocation.items())),
        coverage_allocation=dict(sorted(coverage_allocation.items())),
        per_component_cost=dict(sorted(per_cost.items())),
        total_cost=total,
        combine=combine,
        tables={cid: tables[cid] for cid in order},
    )
