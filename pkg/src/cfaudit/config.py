"""Audit configuration: JSON document, flag overrides, validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .costs import normalize_cost_kind
from .errors import UsageError
from .schema import AttributeSchema


@dataclass
class MetricGrids:
    k_values: list[int] | None = None  # kAUC budgets (default: nice grid in [1, k0])
    d_values: list[float] | None = None  # dAUC bounds (default: nice grid of costs)
    c_values: list[float] = field(default_factory=lambda: [0.25, 0.5, 0.75, 1.0])
    d_range: tuple[float, float] | None = None  # kAUC integration range
    k_max: int | None = None  # dAUC/cAUC budget ceiling (default k0)
    kauc_steps: int = 12
    dauc_steps: int = 12
    cauc_steps: int = 25


@dataclass
class AuditConfig:
    dataset: str
    attributes: list[AttributeSchema]
    epsilon: float
    label_column: str = "label"
    group_column: str = "group"
    subset_rule: str = "negatives"  # or "false_negatives"
    truth_column: str | None = None
    cost: str = "l2"
    kde_bandwidth: float | None = None
    method: str = "auto"  # greedy | exact | auto (exact within cap)
    exact_cap: int = 20
    dp_combine: str = "max"
    seed: int = 0
    out: str = "out"
    metrics: MetricGrids = field(default_factory=MetricGrids)

    def validate(self) -> None:
        if self.epsilon is None or self.epsilon <= 0:
            raise UsageError("epsilon must be positive")
        if self.subset_rule not in ("negatives", "false_negatives"):
            raise UsageError(f"unknown subset rule {self.subset_rule!r}")
        if self.subset_rule == "false_negatives" and not self.truth_column:
            raise UsageError("false_negatives auditing needs a truth_column")
        if self.method not in ("auto", "greedy", "exact"):
            raise UsageError(f"unknown method {self.method!r}")
        if self.dp_combine not in ("max", "sum"):
            raise UsageError(f"unknown dp_combine {self.dp_combine!r}")
        if self.exact_cap < 1:
            raise UsageError("exact_cap must be positive")
        normalize_cost_kind(self.cost)
        for attr in self.attributes:
            attr.validate()
        grids = self.metrics
        if grids.d_range is not None and not grids.d_range[0] < grids.d_range[1]:
            raise UsageError("metrics.d_range needs d_min < d_max")
        for name, steps in (
            ("kauc_steps", grids.kauc_steps),
            ("dauc_steps", grids.dauc_steps),
            ("cauc_steps", grids.cauc_steps),
        ):
            if steps < 2:
                raise UsageError(f"metrics.{name} must be at least 2")
        for c in grids.c_values:
            if not 0 < c <= 1:
                raise UsageError("metrics.c_values must lie in (0, 1]")


def parse_attributes(entries: list[dict]) -> list[AttributeSchema]:
    out = []
    for entry in entries:
        out.append(
            AttributeSchema(
                name=entry["name"],
                kind=entry["kind"],
                constraint=entry.get("constraint", "free"),
                category_order=(
                    tuple(entry["category_order"]) if entry.get("category_order") else None
                ),
            )
        )
    return out


def load_config(path: str, overrides: dict | None = None) -> AuditConfig:
    """Read the JSON config and apply flag overrides (flags > config > defaults)."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return build_config(data, overrides)


def build_config(data: dict, overrides: dict | None = None) -> AuditConfig:
    merged = dict(data)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    try:
        attributes = parse_attributes(merged["attributes"])
        grid_data = merged.get("metrics", {})
        metrics = MetricGrids(
            k_values=grid_data.get("k_values"),
            d_values=grid_data.get("d_values"),
            c_values=grid_data.get("c_values", [0.25, 0.5, 0.75, 1.0]),
            d_range=tuple(grid_data["d_range"]) if grid_data.get("d_range") else None,
            k_max=grid_data.get("k_max"),
            kauc_steps=grid_data.get("kauc_steps", 12),
            dauc_steps=grid_data.get("dauc_steps", 12),
            cauc_steps=grid_data.get("cauc_steps", 25),
        )
        config = AuditConfig(
            dataset=merged["dataset"],
            attributes=attributes,
            epsilon=merged["epsilon"],
            label_column=merged.get("label_column", "label"),
            group_column=merged.get("group_column", "group"),
            subset_rule=merged.get("subset_rule", "negatives"),
            truth_column=merged.get("truth_column"),
            cost=merged.get("cost", "l2"),
            kde_bandwidth=merged.get("kde_bandwidth"),
            method=merged.get("method", "auto"),
            exact_cap=merged.get("exact_cap", 20),
            dp_combine=merged.get("dp_combine", "max"),
            seed=merged.get("seed", 0),
            out=merged.get("out", "out"),
            metrics=metrics,
        )
    except KeyError as missing:
        raise UsageError(f"config is missing required field {missing}") from None
    config.validate()
    return config


def config_to_dict(config: AuditConfig, resolved: dict | None = None) -> dict:
    """Full resolved configuration for embedding into reports."""
    out = {
        "dataset": config.dataset,
        "label_column": config.label_column,
        "group_column": config.group_column,
        "subset_rule": config.subset_rule,
        "truth_column": config.truth_column,
        "epsilon": config.epsilon,
        "cost": normalize_cost_kind(config.cost),
        "kde_bandwidth": config.kde_bandwidth,
        "method": config.method,
        "exact_cap": config.exact_cap,
        "dp_combine": config.dp_combine,
        "seed": config.seed,
        "attributes": [
            {
                "name": a.name,
                "kind": a.kind,
                "constraint": a.constraint,
                "category_order": list(a.category_order) if a.category_order else None,
            }
            for a in config.attributes
        ],
        "metrics": {
            "k_values": config.metrics.k_values,
            "d_values": config.metrics.d_values,
            "c_values": config.metrics.c_values,
            "d_range": list(config.metrics.d_range) if config.metrics.d_range else None,
            "k_max": config.metrics.k_max,
            "kauc_steps": config.metrics.kauc_steps,
            "dauc_steps": config.metrics.dauc_steps,
            "cauc_steps": config.metrics.cauc_steps,
        },
    }
    if resolved:
        out["resolved"] = resolved
    return out
