"""Density-weighted feasibility graphs, group-counterfactual selection, and
fairness-audit metrics over tabular datasets."""

from .config import AuditConfig, MetricGrids, build_config, load_config
from .costs import instance_to_set_cost, pair_cost, set_to_set_cost
from .density import KdeModel, density_at, edge_weight, make_kde, scott_bandwidth
from .errors import AuditError, CapacityError, InfeasibleError, SchemaError, UsageError
from .graph import (
    FeasibilityGraph,
    FeasibilitySet,
    WccIndex,
    build_graph,
    epsilon_sweep,
    feasibility_set,
    weakly_connected_components,
)
from .metrics import (
    AcfReport,
    AucResult,
    Curve,
    MinResources,
    acf,
    acf_report,
    best_coverage_set,
    c_auc,
    d_auc,
    k_auc,
    min_resources,
    nice_grid,
)
from .schema import (
    AttributeSchema,
    DatasetTable,
    EncodedMatrix,
    encode,
    load_csv,
    transition_feasible,
)
from .solvers import (
    AllocationTable,
    SelectionProblem,
    Solution,
    allocate_full_coverage,
    dp_allocate_partial,
    exact_kcenter,
    exact_max_coverage,
    greedy_kcenter,
    greedy_max_coverage,
    interleaved_greedy_max_coverage,
    solve_per_wcc,
)
from .synth import synth_fixture

__version__ = "0.1.0"

__all__ = [
    "AcfReport",
    "AllocationTable",
    "AttributeSchema",
    "AucResult",
    "AuditConfig",
    "AuditError",
    "CapacityError",
    "Curve",
    "DatasetTable",
    "EncodedMatrix",
    "FeasibilityGraph",
    "FeasibilitySet",
    "InfeasibleError",
    "KdeModel",
    "MetricGrids",
    "MinResources",
    "SchemaError",
    "SelectionProblem",
    "Solution",
    "UsageError",
    "WccIndex",
    "acf",
    "acf_report",
    "allocate_full_coverage",
    "best_coverage_set",
    "build_config",
    "build_graph",
    "c_auc",
    "d_auc",
    "density_at",
    "dp_allocate_partial",
    "edge_weight",
    "encode",
    "epsilon_sweep",
    "exact_kcenter",
    "exact_max_coverage",
    "feasibility_set",
    "greedy_kcenter",
    "greedy_max_coverage",
    "instance_to_set_cost",
    "interleaved_greedy_max_coverage",
    "k_auc",
    "load_config",
    "load_csv",
    "make_kde",
    "min_resources",
    "nice_grid",
    "pair_cost",
    "scott_bandwidth",
    "set_to_set_cost",
    "solve_per_wcc",
    "synth_fixture",
    "transition_feasible",
    "weakly_connected_components",
]
