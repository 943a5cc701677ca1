"""End-to-end audit pipeline: encode, build graph, solve, emit report files.

Per group value the pipeline audits the configured subset (negatives or false
negatives), candidates being every opposite-class instance in the table.
Factuals without any reachable candidate are excluded and listed in the
report, never silently dropped. Reports embed the fully resolved
configuration and contain no timestamps, so identical configs and seeds
produce byte-identical output.
"""

from __future__ import annotations

import json
import math
import os
import re

import numpy as np

from .config import AuditConfig, config_to_dict
from .costs import normalize_cost_kind
from .density import make_kde
from .errors import InfeasibleError, SchemaError, UsageError
from .graph import (
    FeasibilityGraph,
    build_graph,
    epsilon_sweep,
    weakly_connected_components,
    write_graph_csv,
)
from .metrics import (
    AucResult,
    acf_report,
    c_auc,
    d_auc,
    k_auc,
    min_resources,
    nice_grid,
)
from .schema import DatasetTable, EncodedMatrix, encode, load_csv
from .solvers import SelectionProblem, Solution, solution_to_dict


def audited_subset(table: DatasetTable, config: AuditConfig, group: str) -> list[int]:
    """Row ids of the group's audited factuals under the configured rule."""
    ids = []
    for index, (label, grp) in enumerate(zip(table.labels, table.groups)):
        if grp != group or label != 0:
            continue
        if config.subset_rule == "false_negatives":
            truth = table.rows[index].get(config.truth_column or "")
            if truth is None:
                raise SchemaError(f"missing truth column {config.truth_column!r}")
            if truth.strip() != "1":
                continue
        ids.append(index)
    return ids


def max_possible_cost(matrix: EncodedMatrix) -> float:
    """Largest pairwise L2 cost in the dataset (cost-normalization convention)."""
    values = matrix.values
    if matrix.n_rows < 2:
        return 0.0
    sq = ((values[:, None, :] - values[None, :, :]) ** 2).sum(axis=2)
    return float(np.sqrt(sq.max()))


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_-]+", "_", text) or "group"


def _json_safe(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_json_safe(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_curve_csv(path: str, xs: list[float], ys: list[float]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("x,y\n")
        for x, y in zip(xs, ys):
            fh.write(f"{float(x)!r},{float(y)!r}\n")


def write_encoded_csv(matrix: EncodedMatrix, path: str) -> None:
    header = ["row_id", "label", "group"] + matrix.column_names
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(matrix.n_rows):
            cells = [str(int(matrix.row_ids[i])), str(int(matrix.labels[i])), str(matrix.groups[i])]
            cells += [repr(float(v)) for v in matrix.values[i]]
            fh.write(",".join(cells) + "\n")


def write_sweep_csv(records, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("epsilon,edges,components,singletons,largest_fraction\n")
        for record in records:
            fh.write(
                f"{record.epsilon!r},{record.edge_count},{record.component_count},"
                f"{record.singleton_count},{record.largest_component_fraction!r}\n"
            )


def load_and_encode(config: AuditConfig) -> tuple[DatasetTable, EncodedMatrix]:
    table = load_csv(config.dataset, config.attributes, config.label_column, config.group_column)
    return table, encode(table)


def build_pipeline_graph(config: AuditConfig, matrix: EncodedMatrix) -> FeasibilityGraph:
    kde = make_kde(matrix.values, config.kde_bandwidth) if matrix.n_rows >= 2 else None
    return build_graph(matrix, config.epsilon, kde=kde)


def merge_component_solutions(solutions: dict[int, Solution]) -> Solution:
    """Union of per-component solutions (selection ordered by component id)."""
    selected: list[int] = []
    assignment: dict[int, tuple[int, float]] = {}
    for cid in sorted(solutions):
        solution = solutions[cid]
        selected.extend(solution.selected)
        assignment.update(solution.assignment)
    max_cost = max((cost for _, cost in assignment.values()), default=0.0)
    optimal = all(s.optimality_flag for s in solutions.values()) if solutions else True
    return Solution(
        selected=selected,
        assignment=assignment,
        coverage_count=len(assignment),
        max_cost=max_cost,
        method_tag="exact" if optimal else "greedy",
        optimality_flag=optimal,
    )


def _auc_entry(result: AucResult, parameter: str, value, curve_file: str) -> dict:
    extremum_key = "min_cost" if result.curve.y_semantics == "min_max_cost" else "max_coverage"
    return {
        parameter: value,
        "value": result.value,
        "raw_area": result.raw_area,
        "saturation_point": result.saturation_point,
        extremum_key: result.extremum,
        "method": result.method_tag,
        "excluded": result.excluded_xs,
        "curve_file": curve_file,
    }


def run_audit(config: AuditConfig, write_files: bool = True) -> dict:
    """Execute the full pipeline for every group; returns the report document."""
    config.validate()
    cost_kind = normalize_cost_kind(config.cost)
    table, matrix = load_and_encode(config)
    graph = build_pipeline_graph(config, matrix)
    wcc = weakly_connected_components(graph)
    ceiling = max_possible_cost(matrix)

    out_dir = config.out
    curves_dir = os.path.join(out_dir, "curves")
    if write_files:
        os.makedirs(curves_dir, exist_ok=True)

    group_values = sorted({str(g) for g in matrix.groups})
    groups_report: dict[str, dict] = {}
    curve_writes: list[tuple[str, list[float], list[float]]] = []

    for group in group_values:
        factuals = audited_subset(table, config, group)
        section: dict = {"audited_rule": config.subset_rule}
        if not factuals:
            section.update({"audited": 0, "excluded": [], "note": "no audited factuals"})
            groups_report[group] = section
            continue
        problem = SelectionProblem.from_graph(
            graph,
            factuals,
            candidates=None,
            k=1,
            cost_kind=cost_kind,
            drop_unreachable=True,
        )
        section["excluded"] = list(problem.excluded)
        section["excluded_count"] = len(problem.excluded)
        section["audited"] = len(problem.factuals)
        if not problem.factuals:
            section["note"] = "every audited factual lacks reachable counterfactuals"
            groups_report[group] = section
            continue

        components = sorted(
            {int(wcc.component_of[f]) for f in problem.factuals}
        )
        section["m"] = len(components)

        resources = min_resources(problem, wcc, method=_solver_method(config), cap=config.exact_cap)
        section["k0"] = resources.k0
        section["d0"] = resources.d0
        section["min_resources_method"] = resources.method_tag
        comp_sizes = {
            cid: [f for f in problem.factuals if wcc.component_of[f] == cid]
            for cid in components
        }
        cand_sizes = {
            cid: [c for c in problem.candidates if wcc.component_of[c] == cid]
            for cid in components
        }
        section["per_wcc"] = [
            {
                "component": cid,
                "factuals": len(comp_sizes.get(cid, [])),
                "candidates": len(cand_sizes.get(cid, [])),
                "k0": k0_i,
                "d0": d0_i,
            }
            for cid, k0_i, d0_i in resources.per_wcc
        ]

        k0 = resources.k0
        slug = _slug(group)
        grids = config.metrics
        d_hi = grids.d_range[1] if grids.d_range else max(ceiling, 1e-9)
        d_lo = grids.d_range[0] if grids.d_range else min(0.1, d_hi / 2)
        k_ceiling = grids.k_max or max(k0, 1)
        k_values = grids.k_values or _int_grid(1, k0)
        d_values = grids.d_values or nice_grid(d_lo, d_hi, 4)

        method = config.method
        cap = config.exact_cap
        section["kauc"] = []
        for k in k_values:
            result = k_auc(problem, int(k), (d_lo, d_hi), grids.kauc_steps, method, cap)
            curve_file = f"curves/{slug}_kauc_k{int(k)}.csv"
            curve_writes.append((curve_file, result.curve.xs, result.curve.ys))
            section["kauc"].append(_auc_entry(result, "k", int(k), curve_file))
        section["dauc"] = []
        for d in d_values:
            if k_ceiling < 2:
                continue  # a one-point budget axis has no area to integrate
            result = d_auc(problem, float(d), (1, k_ceiling), grids.dauc_steps, method, cap)
            curve_file = f"curves/{slug}_dauc_d{_num_slug(d)}.csv"
            curve_writes.append((curve_file, result.curve.xs, result.curve.ys))
            section["dauc"].append(_auc_entry(result, "d", float(d), curve_file))
        section["cauc"] = []
        for c in grids.c_values:
            try:
                result = c_auc(problem, float(c), (1, k_ceiling), grids.cauc_steps, method, cap)
            except InfeasibleError as err:
                section["cauc"].append({"c": float(c), "infeasible": str(err)})
                continue
            curve_file = f"curves/{slug}_cauc_c{_num_slug(c)}.csv"
            curve_writes.append((curve_file, result.curve.xs, result.curve.ys))
            section["cauc"].append(_auc_entry(result, "c", float(c), curve_file))

        full_solution = merge_component_solutions(resources.solutions)
        section["full_coverage_solution"] = solution_to_dict(full_solution)
        overall = acf_report(matrix, problem, full_solution, population=f"group:{group}")
        per_wcc_acf = {}
        for cid, solution in sorted(resources.solutions.items()):
            sub_factuals = comp_sizes.get(cid, [])
            sub_problem = problem.restrict(sub_factuals, cand_sizes.get(cid, []) or problem.candidates)
            per_wcc_acf[str(cid)] = acf_report(
                matrix, sub_problem, solution, population=f"group:{group}/wcc:{cid}"
            ).frequencies
        section["acf"] = {"overall": overall.frequencies, "per_wcc": per_wcc_acf}
        groups_report[group] = section

    report = {
        "config": config_to_dict(
            config,
            resolved={
                "kde_bandwidth": graph.bandwidth,
                "epsilon": graph.epsilon,
                "cost_kind": cost_kind,
                "max_possible_cost": ceiling,
                "normalization": "min-max over the ingested table",
                "kde_space": "encoded feature space, all rows as support",
                "coverage_denominator": "coverable audited factuals",
            },
        ),
        "dataset": {
            "rows": matrix.n_rows,
            "encoded_columns": matrix.n_columns,
            "column_names": matrix.column_names,
        },
        "graph": {
            "edges": graph.n_edges,
            "components": wcc.m,
            "component_sizes": [len(c) for c in wcc.components],
        },
        "groups": groups_report,
    }

    if write_files:
        for rel_path, xs, ys in curve_writes:
            write_curve_csv(os.path.join(out_dir, rel_path), xs, ys)
        write_graph_csv(
            graph,
            os.path.join(out_dir, "graph.csv"),
            os.path.join(out_dir, "graph.meta.json"),
        )
        write_json(os.path.join(out_dir, "report.json"), report)
    return report


def run_sweep(config: AuditConfig, epsilons: list[float], write_files: bool = True) -> list:
    """Connectivity sweep over epsilon values; writes sweep.csv."""
    if not epsilons:
        raise UsageError("provide at least one epsilon")
    _, matrix = load_and_encode(config)
    records = epsilon_sweep(matrix, epsilons, bandwidth=config.kde_bandwidth)
    if write_files:
        os.makedirs(config.out, exist_ok=True)
        write_sweep_csv(records, os.path.join(config.out, "sweep.csv"))
    return records


def _solver_method(config: AuditConfig) -> str:
    return "exact" if config.method in ("auto", "exact") else "greedy"


def _int_grid(lo: int, hi: int) -> list[int]:
    if hi <= lo:
        return [lo]
    return [int(v) for v in nice_grid(lo, hi, min(4, hi - lo + 1), integer=True)]


def _num_slug(value: float) -> str:
    return re.sub(r"[^0-9]+", "p", f"{float(value):g}")
