"""Command-line interface: encode, graph build/sweep, solve, audit, acf, synth."""

from __future__ import annotations

import json
import os
import sys

import click

from .audit import (
    build_pipeline_graph,
    load_and_encode,
    merge_component_solutions,
    run_audit,
    run_sweep,
    write_encoded_csv,
    write_json,
)
from .config import load_config
from .errors import AuditError
from .graph import weakly_connected_components, write_graph_csv
from .metrics import acf_report, min_resources
from .solvers import (
    SelectionProblem,
    exact_kcenter,
    exact_max_coverage,
    greedy_kcenter,
    greedy_max_coverage,
    solution_to_dict,
)
from .synth import synth_fixture

_OVERRIDE_KEYS = ("epsilon", "cost", "kde_bandwidth", "method", "exact_cap", "dp_combine", "seed", "out")


def _config_options(fn):
    fn = click.option("--config", "config_path", required=True, type=click.Path(exists=True))(fn)
    fn = click.option("--epsilon", type=float, default=None)(fn)
    fn = click.option("--cost", type=click.Choice(["l2", "path", "hops"]), default=None)(fn)
    fn = click.option("--kde-bandwidth", "kde_bandwidth", type=float, default=None)(fn)
    fn = click.option("--method", type=click.Choice(["auto", "greedy", "exact"]), default=None)(fn)
    fn = click.option("--exact-cap", "exact_cap", type=int, default=None)(fn)
    fn = click.option("--dp-combine", "dp_combine", type=click.Choice(["max", "sum"]), default=None)(fn)
    fn = click.option("--seed", type=int, default=None)(fn)
    fn = click.option("--out", type=click.Path(), default=None)(fn)
    return fn


def _load(config_path: str, kwargs: dict):
    overrides = {key: kwargs.get(key) for key in _OVERRIDE_KEYS}
    return load_config(config_path, overrides)


@click.group()
def main():
    """Feasibility-graph group-counterfactual audits over tabular data."""


@main.command()
@_config_options
def encode(config_path, **kwargs):
    """Encode the dataset and write encoded.csv."""
    config = _load(config_path, kwargs)
    _, matrix = load_and_encode(config)
    os.makedirs(config.out, exist_ok=True)
    path = os.path.join(config.out, "encoded.csv")
    write_encoded_csv(matrix, path)
    click.echo(f"encoded {matrix.n_rows} rows x {matrix.n_columns} columns -> {path}")


@main.group()
def graph():
    """Feasibility-graph construction and connectivity sweeps."""


@graph.command("build")
@_config_options
def graph_build(config_path, **kwargs):
    """Build the feasibility graph and write graph.csv + graph.meta.json."""
    config = _load(config_path, kwargs)
    _, matrix = load_and_encode(config)
    g = build_pipeline_graph(config, matrix)
    wcc = weakly_connected_components(g)
    os.makedirs(config.out, exist_ok=True)
    write_graph_csv(
        g,
        os.path.join(config.out, "graph.csv"),
        os.path.join(config.out, "graph.meta.json"),
    )
    click.echo(
        f"graph: {g.n_nodes} nodes, {g.n_edges} edges, {wcc.m} components "
        f"(epsilon={g.epsilon}, bandwidth={g.bandwidth!r})"
    )


@graph.command("sweep")
@click.option("--epsilons", required=True, help="comma-separated ascending list")
@_config_options
def graph_sweep(config_path, epsilons, **kwargs):
    """Connectivity statistics per epsilon; writes sweep.csv."""
    config = _load(config_path, kwargs)
    values = [float(v) for v in epsilons.split(",") if v.strip()]
    records = run_sweep(config, values)
    for record in records:
        click.echo(
            f"epsilon={record.epsilon!r} edges={record.edge_count} "
            f"components={record.component_count} singletons={record.singleton_count} "
            f"largest={record.largest_component_fraction!r}"
        )
    click.echo(f"wrote {os.path.join(config.out, 'sweep.csv')}")


def _problems_per_group(config):
    table, matrix = load_and_encode(config)
    g = build_pipeline_graph(config, matrix)
    from .audit import audited_subset

    problems = {}
    for group in sorted({str(v) for v in matrix.groups}):
        factuals = audited_subset(table, config, group)
        if not factuals:
            continue
        problem = SelectionProblem.from_graph(
            g, factuals, k=1, cost_kind=config.cost, drop_unreachable=True
        )
        if problem.factuals:
            problems[group] = problem
    return g, problems


@main.group()
def solve():
    """Solve selection problems per group and write solution reports."""


@solve.command("max-coverage")
@click.option("--k", type=int, required=True)
@click.option("--d", type=float, required=True)
@_config_options
def solve_max_coverage(config_path, k, d, **kwargs):
    """Cost-constrained maximum coverage for each group's audited subset."""
    config = _load(config_path, kwargs)
    _, problems = _problems_per_group(config)
    os.makedirs(config.out, exist_ok=True)
    for group, problem in problems.items():
        scoped = problem.with_budget(k)
        if config.method == "exact" or (
            config.method == "auto" and len(problem.candidates) <= config.exact_cap
        ):
            solution = exact_max_coverage(scoped, d, config.exact_cap)
        else:
            solution = greedy_max_coverage(scoped, d)
        path = os.path.join(config.out, f"solution_maxcov_{group}.json")
        write_json(path, solution_to_dict(solution))
        click.echo(
            f"group {group}: coverage {solution.coverage_count}/{len(problem.factuals)} "
            f"with {len(solution.selected)} counterfactuals ({solution.method_tag}) -> {path}"
        )


@solve.command("k-center")
@click.option("--k", type=int, required=True)
@click.option("--c", type=float, required=True)
@_config_options
def solve_k_center(config_path, k, c, **kwargs):
    """Coverage-constrained min-max cost for each group's audited subset."""
    config = _load(config_path, kwargs)
    _, problems = _problems_per_group(config)
    os.makedirs(config.out, exist_ok=True)
    for group, problem in problems.items():
        scoped = problem.with_budget(k)
        if config.method == "exact" or (
            config.method == "auto" and len(problem.candidates) <= config.exact_cap
        ):
            solution = exact_kcenter(scoped, c, config.exact_cap)
        else:
            solution = greedy_kcenter(scoped, c, seed=config.seed)
        path = os.path.join(config.out, f"solution_kcenter_{group}.json")
        write_json(path, solution_to_dict(solution))
        click.echo(
            f"group {group}: max cost {solution.max_cost!r} covering "
            f"{solution.coverage_count}/{len(problem.factuals)} ({solution.method_tag}) -> {path}"
        )


@main.command()
@_config_options
def audit(config_path, **kwargs):
    """Run the full audit pipeline and write report.json, curves, and the graph."""
    config = _load(config_path, kwargs)
    report = run_audit(config)
    for group, section in report["groups"].items():
        if "k0" in section:
            click.echo(
                f"group {group}: m={section['m']} k0={section['k0']} d0={section['d0']!r} "
                f"audited={section['audited']} excluded={section['excluded_count']}"
            )
        else:
            click.echo(f"group {group}: {section.get('note', 'skipped')}")
    click.echo(f"wrote {os.path.join(config.out, 'report.json')}")


@main.command()
@_config_options
def acf(config_path, **kwargs):
    """Attribute change frequencies per group (min-resources assignment)."""
    config = _load(config_path, kwargs)
    g, problems = _problems_per_group(config)
    wcc = weakly_connected_components(g)
    os.makedirs(config.out, exist_ok=True)
    payload = {}
    for group, problem in problems.items():
        resources = min_resources(
            problem, wcc, method="exact" if config.method != "greedy" else "greedy",
            cap=config.exact_cap,
        )
        solution = merge_component_solutions(resources.solutions)
        report = acf_report(g.matrix, problem, solution, population=f"group:{group}")
        payload[group] = report.frequencies
        for name, frequency in sorted(report.frequencies.items()):
            click.echo(f"group {group}: {name} {frequency!r}")
    path = os.path.join(config.out, "acf.json")
    write_json(path, payload)
    click.echo(f"wrote {path}")


@main.command()
@click.option("--sizes", required=True, help="comma-separated component sizes")
@click.option("--candidates", default=None, help="comma-separated label-1 counts per component")
@click.option("--epsilon", type=float, default=0.35)
@click.option("--seed", type=int, default=0)
@click.option("--template", type=click.Choice(["f1"]), default=None)
@click.option("--out", type=click.Path(), default="synth_out")
def synth(sizes, candidates, epsilon, seed, template, out):
    """Generate a synthetic dataset plus a matching audit config."""
    size_list = [int(v) for v in sizes.split(",") if v.strip()]
    cand_list = (
        [int(v) for v in candidates.split(",") if v.strip()] if candidates else None
    )
    result = synth_fixture(
        size_list, cand_list, epsilon=epsilon, seed=seed, template=template
    )
    os.makedirs(out, exist_ok=True)
    data_path = os.path.join(out, "dataset.csv")
    result.write_csv(data_path)
    config = {
        "dataset": data_path,
        "label_column": result.label_column,
        "group_column": result.group_column,
        "epsilon": result.epsilon,
        "attributes": result.schema_config(),
        "out": os.path.join(out, "audit"),
    }
    config_path = os.path.join(out, "config.json")
    with open(config_path, "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo(f"wrote {data_path} and {config_path} ({len(result.rows)} rows)")


def run():  # pragma: no cover - thin wrapper
    try:
        main(standalone_mode=False)
    except AuditError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    except click.exceptions.Exit as err:
        sys.exit(err.exit_code)
    except click.ClickException as err:
        err.show()
        sys.exit(err.exit_code)


if __name__ == "__main__":  # pragma: no cover
    run()
