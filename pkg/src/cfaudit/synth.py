"""Deterministic synthetic datasets with a requested component structure.

The generator lays one ordered-categorical attribute out on an integer rank
line: members of a component sit at consecutive (lightly jittered) ranks while
components are separated by runs of unobserved categories wide enough that,
after min-max normalization, cross-component distances exceed epsilon and
within-component steps stay below it.

A special template reproduces the canonical two-component demo geometry
(encoded values 0.0/0.3/0.9 for the factuals and 0.1/0.8 for the candidates
at epsilon 0.35) through the continuous-binning pipeline; it carries one
extra far-side row that pins the bin scale.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .schema import AttributeSchema

F1_EPSILON = 0.35
_F1_ROWS = [
    # (v, label, group): encoded v becomes 0.0, 0.3, 0.9, 0.1, 0.8, 1.0
    ("0", "0", "a"),
    ("600", "0", "a"),
    ("1700", "0", "a"),
    ("200", "1", "a"),
    ("1500", "1", "a"),
    ("2000", "0", "b"),
]


@dataclass
class SynthResult:
    rows: list[dict[str, str]]
    schema: list[AttributeSchema]
    label_column: str
    group_column: str
    epsilon: float

    def write_csv(self, path: str) -> None:
        columns = [a.name for a in self.schema] + [self.label_column, self.group_column]
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=columns)
            writer.writeheader()
            for row in self.rows:
                writer.writerow(row)

    def schema_config(self) -> list[dict]:
        out = []
        for attr in self.schema:
            entry: dict = {"name": attr.name, "kind": attr.kind, "constraint": attr.constraint}
            if attr.category_order:
                entry["category_order"] = list(attr.category_order)
            out.append(entry)
        return out


def synth_fixture(
    sizes: list[int],
    candidates: list[int] | None = None,
    epsilon: float = 0.35,
    seed: int = 0,
    template: str | None = None,
    coverable: bool = True,
) -> SynthResult:
    """Dataset whose feasibility graph at ``epsilon`` has one WCC per size entry.

    ``candidates[i]`` members of component i carry label 1 (default one per
    component). With ``coverable`` every component holding factuals must also
    hold a candidate, otherwise the spec is rejected.
    """
    if template == "f1":
        if sizes not in ([3, 2], [3, 3]):
            raise UsageError("the f1 template is a fixed two-component geometry")
        rows = [{"v": v, "label": label, "group": group} for v, label, group in _F1_ROWS]
        return SynthResult(
            rows=rows,
            schema=[AttributeSchema(name="v", kind="continuous", constraint="free")],
            label_column="label",
            group_column="group",
            epsilon=F1_EPSILON,
        )
    if template is not None:
        raise UsageError(f"unknown template {template!r}")
    if not sizes or any(s < 1 for s in sizes):
        raise UsageError("component sizes must be positive")
    if epsilon <= 0 or epsilon >= 1:
        raise UsageError("epsilon must be in (0, 1) for the rank layout")
    if candidates is None:
        candidates = [1 if size >= 2 else 0 for size in sizes]
    if len(candidates) != len(sizes):
        raise UsageError("candidates must align with sizes")
    for size, n_cand in zip(sizes, candidates):
        if not 0 <= n_cand <= size:
            raise UsageError("candidate counts must lie within component sizes")
        if coverable and size - n_cand > 0 and n_cand == 0:
            raise UsageError(
                "component flagged coverable has factuals but no candidates"
            )

    rng = np.random.default_rng(seed)
    m = len(sizes)
    steps: list[list[int]] = [
        [int(rng.integers(1, 3)) for _ in range(size - 1)] for size in sizes
    ]
    spans = [sum(s) for s in steps]
    total_span = sum(spans)

    if m == 1:
        span = spans[0]
        if span and span > 0 and (max(steps[0]) / span) > 0.99 * epsilon:
            steps = [[0] * (sizes[0] - 1)]  # too tight to spread: stack members
        positions = [_positions(0, steps[0])]
    else:
        margin = 1.0 - 1.01 * epsilon * (m - 1)
        if margin <= 0:
            raise UsageError(
                f"{m} mutually separated components are impossible at epsilon={epsilon} "
                "on one dimension; lower epsilon or the component count"
            )
        gap = math.ceil(1.01 * epsilon * total_span / margin) + 1
        while True:
            total = total_span + (m - 1) * gap
            if total > 200_000:
                raise UsageError("layout exploded; epsilon is too small for these sizes")
            worst_step = max((max(s) for s in steps if s), default=0)
            if worst_step / total <= 0.99 * epsilon and gap / total > 1.005 * epsilon:
                break
            gap += max(1, gap // 4)
        positions = []
        cursor = 0
        for index, size in enumerate(sizes):
            positions.append(_positions(cursor, steps[index]))
            cursor = positions[-1][-1] + gap

    highest = positions[-1][-1]
    width = max(4, len(str(highest)))
    order = tuple(f"c{rank:0{width}d}" for rank in range(highest + 1))
    rows: list[dict[str, str]] = []
    for index, (size, n_cand) in enumerate(zip(sizes, candidates)):
        member_positions = positions[index]
        candidate_slots = sorted(
            int(i) for i in rng.choice(size, size=n_cand, replace=False)
        )
        for member in range(size):
            rows.append(
                {
                    "v": order[member_positions[member]],
                    "label": "1" if member in candidate_slots else "0",
                    "group": "a",
                }
            )
    schema = [
        AttributeSchema(
            name="v",
            kind="ordered_categorical",
            constraint="free",
            category_order=order,
        )
    ]
    return SynthResult(
        rows=rows,
        schema=schema,
        label_column="label",
        group_column="group",
        epsilon=epsilon,
    )


def _positions(start: int, steps: list[int]) -> list[int]:
    out = [start]
    for step in steps:
        out.append(out[-1] + step)
    return out
