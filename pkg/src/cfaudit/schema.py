"""Tabular ingest: attribute schemas, CSV loading, and [0,1] feature encoding.

Encoding rules per attribute kind:
  binary                -> 0/1 (lexicographically smaller raw value maps to 0)
  ordered_categorical   -> rank given by position in ``category_order``, then
                           min-max normalized over the observed ranks
  unordered_categorical -> one one-hot column per observed category
  continuous            -> equal-width bins (count from the log-based heuristic
                           below), bin index min-max normalized

Continuous bin count: B = max(2, round(log2(u) * (1 + log10(1 + r)))) where u
is the number of distinct values and r their range; round is half-up.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import SchemaError, UsageError

KINDS = ("continuous", "ordered_categorical", "unordered_categorical", "binary")
CONSTRAINTS = ("immutable", "increase_only", "decrease_only", "free")

# Kinds with a total order; directional constraints only make sense for these.
ORDERED_KINDS = ("continuous", "ordered_categorical", "binary")


@dataclass(frozen=True)
class AttributeSchema:
    """Declared kind, feasibility constraint, and encoding metadata of one attribute."""

    name: str
    kind: str
    constraint: str = "free"
    category_order: tuple[str, ...] | None = None
    bin_count: int | None = None
    encoded_span: tuple[int, int] | None = None  # [start, stop) encoded columns

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise SchemaError(f"attribute {self.name!r}: unknown kind {self.kind!r}")
        if self.constraint not in CONSTRAINTS:
            raise SchemaError(
                f"attribute {self.name!r}: unknown constraint {self.constraint!r}"
            )
        if self.constraint in ("increase_only", "decrease_only") and self.kind not in ORDERED_KINDS:
            raise SchemaError(
                f"attribute {self.name!r}: directional constraint requires an ordered kind"
            )
        if self.kind == "ordered_categorical":
            if not self.category_order:
                raise SchemaError(
                    f"attribute {self.name!r}: ordered_categorical requires category_order"
                )
            if len(set(self.category_order)) != len(self.category_order):
                raise SchemaError(
                    f"attribute {self.name!r}: category_order has duplicate entries"
                )
        elif self.category_order is not None:
            raise SchemaError(
                f"attribute {self.name!r}: category_order is only valid for ordered_categorical"
            )


@dataclass
class DatasetTable:
    """Raw rows plus the schema and the label/group column names."""

    rows: list[dict[str, str]]
    schema: list[AttributeSchema]
    label_column: str
    group_column: str
    labels: list[int] = field(default_factory=list)
    groups: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class EncodedMatrix:
    """Encoded rows in [0,1]^D with stable row ids and per-attribute column spans."""

    values: np.ndarray  # (n, D) float64
    row_ids: np.ndarray  # (n,) int
    schema: list[AttributeSchema]  # encoded_span filled
    labels: np.ndarray  # (n,) int
    groups: np.ndarray  # (n,) str
    column_names: list[str]

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_columns(self) -> int:
        return self.values.shape[1]

    def attribute(self, name: str) -> AttributeSchema:
        for attr in self.schema:
            if attr.name == name:
                return attr
        raise UsageError(f"unknown attribute {name!r}")


def load_csv(
    path: str,
    schema: list[AttributeSchema],
    label_column: str,
    group_column: str,
) -> DatasetTable:
    """Read a header-first CSV into a DatasetTable, validating columns and labels.

    Row identifiers are 0-based file positions and stay stable downstream.
    """
    for attr in schema:
        attr.validate()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        needed = [a.name for a in schema] + [label_column, group_column]
        for column in needed:
            if column not in header:
                raise SchemaError(f"missing column {column!r} in {path}")
        rows: list[dict[str, str]] = []
        labels: list[int] = []
        groups: list[str] = []
        for index, raw in enumerate(reader):
            label = raw[label_column].strip()
            if label not in ("0", "1"):
                raise ValueError(
                    f"row {index}: label {label!r} not in {{0,1}} (column {label_column!r})"
                )
            for attr in schema:
                if attr.kind == "continuous":
                    try:
                        float(raw[attr.name])
                    except ValueError:
                        raise ValueError(
                            f"row {index}, column {attr.name!r}: "
                            f"cannot parse {raw[attr.name]!r} as a number"
                        ) from None
            rows.append({key: value for key, value in raw.items() if key is not None})
            labels.append(int(label))
            groups.append(raw[group_column].strip())
    return DatasetTable(
        rows=rows,
        schema=list(schema),
        label_column=label_column,
        group_column=group_column,
        labels=labels,
        groups=groups,
    )


def continuous_bin_count(unique_values: int, value_range: float) -> int:
    """Heuristic bin count: max(2, round(log2(u) * (1 + log10(1 + r)))), round half-up."""
    if unique_values < 1:
        raise UsageError("unique_values must be >= 1")
    if unique_values == 1:
        return 2
    raw = math.log2(unique_values) * (1.0 + math.log10(1.0 + value_range))
    return max(2, int(math.floor(raw + 0.5)))


def _minmax(column: np.ndarray) -> np.ndarray:
    lo = column.min()
    hi = column.max()
    if hi == lo:
        # Constant columns normalize to zero instead of dividing by zero.
        return np.zeros_like(column, dtype=np.float64)
    return (column - lo) / (hi - lo)


def encode(table: DatasetTable) -> EncodedMatrix:
    """Encode and normalize every attribute; deterministic for a fixed table."""
    n = len(table.rows)
    columns: list[np.ndarray] = []
    names: list[str] = []
    encoded_schema: list[AttributeSchema] = []
    cursor = 0
    for attr in table.schema:
        attr.validate()
        raw = [row[attr.name].strip() for row in table.rows]
        if attr.kind == "binary":
            values = sorted(set(raw))
            if len(values) > 2:
                raise SchemaError(
                    f"attribute {attr.name!r}: binary attribute has {len(values)} distinct values"
                )
            mapping = {value: float(rank) for rank, value in enumerate(values)}
            column = np.array([mapping[cell] for cell in raw], dtype=np.float64)
            columns.append(column)
            names.append(attr.name)
            span = (cursor, cursor + 1)
        elif attr.kind == "ordered_categorical":
            order = list(attr.category_order or ())
            rank_of = {category: rank for rank, category in enumerate(order)}
            unseen = sorted(set(raw) - set(order))
            if unseen:
                raise SchemaError(
                    f"attribute {attr.name!r}: values {unseen} not in category_order"
                )
            ranks = np.array([rank_of[cell] for cell in raw], dtype=np.float64)
            columns.append(_minmax(ranks) if n else ranks)
            names.append(attr.name)
            span = (cursor, cursor + 1)
        elif attr.kind == "unordered_categorical":
            categories = sorted(set(raw))
            for category in categories:
                columns.append(
                    np.array([1.0 if cell == category else 0.0 for cell in raw])
                )
                names.append(f"{attr.name}={category}")
            span = (cursor, cursor + max(1, len(categories)))
            if not categories:  # empty table: keep a placeholder column
                columns.append(np.zeros(0, dtype=np.float64))
                names.append(attr.name)
        elif attr.kind == "continuous":
            numbers = np.array([float(cell) for cell in raw], dtype=np.float64)
            if n:
                unique = np.unique(numbers)
                value_range = float(unique.max() - unique.min())
                bins = continuous_bin_count(len(unique), value_range)
                if value_range == 0.0:
                    indices = np.zeros(n, dtype=np.float64)
                else:
                    width = value_range / bins
                    indices = np.floor((numbers - unique.min()) / width)
                    indices = np.minimum(indices, bins - 1).astype(np.float64)
                attr = replace(attr, bin_count=bins)
                columns.append(_minmax(indices))
            else:
                attr = replace(attr, bin_count=2)
                columns.append(numbers)
            names.append(attr.name)
            span = (cursor, cursor + 1)
        else:  # pragma: no cover - validate() rejects unknown kinds
            raise SchemaError(f"unknown kind {attr.kind!r}")
        encoded_schema.append(replace(attr, encoded_span=span))
        cursor = span[1]

    values = (
        np.column_stack(columns) if columns and n else np.zeros((n, cursor), dtype=np.float64)
    )
    return EncodedMatrix(
        values=values,
        row_ids=np.arange(n, dtype=np.int64),
        schema=encoded_schema,
        labels=np.array(table.labels, dtype=np.int64),
        groups=np.array(table.groups, dtype=object),
        column_names=names,
    )


def transition_feasible(a: np.ndarray, b: np.ndarray, schema: list[AttributeSchema]) -> bool:
    """True iff moving from encoded row ``a`` to ``b`` respects every constraint.

    Immutable attributes compare equal over their full encoded span (so one-hot
    categories cannot drift column by column); directional constraints compare
    the single encoded value.
    """
    for attr in schema:
        if attr.encoded_span is None:
            raise UsageError(f"attribute {attr.name!r} has no encoded_span; encode first")
        start, stop = attr.encoded_span
        if attr.constraint == "free":
            continue
        if attr.constraint == "immutable":
            if not np.array_equal(a[start:stop], b[start:stop]):
                return False
        elif attr.constraint == "increase_only":
            if b[start] < a[start]:
                return False
        elif attr.constraint == "decrease_only":
            if b[start] > a[start]:
                return False
    return True


def feasibility_mask(matrix: EncodedMatrix) -> np.ndarray:
    """(n, n) boolean matrix: entry [i, j] is transition_feasible(row i, row j)."""
    n = matrix.n_rows
    mask = np.ones((n, n), dtype=bool)
    values = matrix.values
    for attr in matrix.schema:
        start, stop = attr.encoded_span  # type: ignore[misc]
        if attr.constraint == "free":
            continue
        if attr.constraint == "immutable":
            block = values[:, start:stop]
            same = np.ones((n, n), dtype=bool)
            for offset in range(stop - start):
                col = block[:, offset]
                same &= col[:, None] == col[None, :]
            mask &= same
        elif attr.constraint == "increase_only":
            col = values[:, start]
            mask &= col[None, :] >= col[:, None]
        elif attr.constraint == "decrease_only":
            col = values[:, start]
            mask &= col[None, :] <= col[:, None]
    return mask
