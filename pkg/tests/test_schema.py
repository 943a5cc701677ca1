import math

import numpy as np
import pytest

from cfaudit.errors import SchemaError, UsageError
from cfaudit.schema import (
    AttributeSchema,
    continuous_bin_count,
    encode,
    feasibility_mask,
    load_csv,
    transition_feasible,
    DatasetTable,
)


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


SCHEMA = [
    AttributeSchema(name="age", kind="continuous", constraint="increase_only"),
    AttributeSchema(name="sex", kind="binary", constraint="immutable"),
]


class TestLoadCsv:
    def test_four_rows(self, tmp_path):
        path = write_csv(tmp_path, "age,sex,label,group\n1,m,0,a\n2,f,1,a\n3,m,0,b\n4,f,1,b\n")
        table = load_csv(path, SCHEMA, "label", "group")
        assert len(table) == 4
        assert table.labels == [0, 1, 0, 1]
        assert table.groups == ["a", "a", "b", "b"]

    def test_bad_label_reports_row(self, tmp_path):
        path = write_csv(tmp_path, "age,sex,label,group\n1,m,0,a\n2,f,2,a\n")
        with pytest.raises(ValueError, match="row 1"):
            load_csv(path, SCHEMA, "label", "group")

    def test_header_only(self, tmp_path):
        path = write_csv(tmp_path, "age,sex,label,group\n")
        table = load_csv(path, SCHEMA, "label", "group")
        assert len(table) == 0

    def test_missing_column_named(self, tmp_path):
        path = write_csv(tmp_path, "age,label,group\n1,0,a\n")
        with pytest.raises(SchemaError, match="sex"):
            load_csv(path, SCHEMA, "label", "group")

    def test_unparseable_cell_reports_position(self, tmp_path):
        path = write_csv(tmp_path, "age,sex,label,group\noops,m,0,a\n")
        with pytest.raises(ValueError, match="row 0.*age"):
            load_csv(path, SCHEMA, "label", "group")


def table_of(rows, schema):
    labels = [int(r["label"]) for r in rows]
    groups = [r["group"] for r in rows]
    return DatasetTable(rows, schema, "label", "group", labels, groups)


class TestEncode:
    def test_binary_levels(self):
        schema = [AttributeSchema(name="b", kind="binary")]
        rows = [
            {"b": "no", "label": "0", "group": "a"},
            {"b": "yes", "label": "1", "group": "a"},
        ]
        matrix = encode(table_of(rows, schema))
        assert matrix.values[:, 0].tolist() == [0.0, 1.0]

    def test_ordered_rank_then_minmax(self):
        schema = [
            AttributeSchema(
                name="o", kind="ordered_categorical", category_order=("low", "mid", "high")
            )
        ]
        rows = [
            {"o": "high", "label": "0", "group": "a"},
            {"o": "low", "label": "1", "group": "a"},
        ]
        matrix = encode(table_of(rows, schema))
        assert matrix.values[:, 0].tolist() == [1.0, 0.0]

    def test_bin_count_formula(self):
        # Independent recomputation of the bin-count heuristic.
        u, r = 16, 1.0
        expected = max(2, int(math.floor(math.log2(u) * (1 + math.log10(1 + r)) + 0.5)))
        assert continuous_bin_count(u, r) == expected
        assert expected == 5

        schema = [AttributeSchema(name="x", kind="continuous")]
        raw = [i / 15 for i in range(16)]  # u=16 distinct, range 1.0
        rows = [{"x": str(v), "label": "0", "group": "a"} for v in raw]
        matrix = encode(table_of(rows, schema))
        assert matrix.schema[0].bin_count == expected
        assert matrix.values.min() == 0.0 and matrix.values.max() == 1.0

    def test_one_hot_sums_to_one(self):
        schema = [AttributeSchema(name="c", kind="unordered_categorical")]
        rows = [{"c": v, "label": "0", "group": "a"} for v in ["x", "y", "z", "x"]]
        matrix = encode(table_of(rows, schema))
        assert matrix.values.shape == (4, 3)
        assert np.allclose(matrix.values.sum(axis=1), 1.0)
        assert matrix.column_names == ["c=x", "c=y", "c=z"]
        assert matrix.schema[0].encoded_span == (0, 3)

    def test_constant_column_zeroes(self):
        schema = [AttributeSchema(name="x", kind="continuous")]
        rows = [{"x": "7", "label": "0", "group": "a"} for _ in range(3)]
        matrix = encode(table_of(rows, schema))
        assert (matrix.values == 0.0).all()

    def test_unseen_category_rejected(self):
        schema = [
            AttributeSchema(name="o", kind="ordered_categorical", category_order=("a", "b"))
        ]
        rows = [{"o": "c", "label": "0", "group": "a"}]
        with pytest.raises(SchemaError, match="category_order"):
            encode(table_of(rows, schema))

    def test_deterministic(self):
        schema = [
            AttributeSchema(name="x", kind="continuous"),
            AttributeSchema(name="c", kind="unordered_categorical"),
        ]
        rows = [
            {"x": str(v), "c": c, "label": "0", "group": "a"}
            for v, c in zip([0.1, 0.5, 0.9, 0.3], ["p", "q", "p", "r"])
        ]
        first = encode(table_of(rows, schema))
        second = encode(table_of(rows, schema))
        assert np.array_equal(first.values, second.values)
        assert first.column_names == second.column_names

    def test_values_in_unit_interval(self):
        rng = np.random.default_rng(3)
        schema = [
            AttributeSchema(name="x", kind="continuous"),
            AttributeSchema(name="b", kind="binary"),
        ]
        rows = [
            {"x": str(rng.normal() * 10), "b": str(int(rng.integers(0, 2))), "label": "0", "group": "a"}
            for _ in range(40)
        ]
        matrix = encode(table_of(rows, schema))
        assert matrix.values.min() >= 0.0 and matrix.values.max() <= 1.0


class TestSchemaValidation:
    def test_directional_needs_order(self):
        attr = AttributeSchema(name="c", kind="unordered_categorical", constraint="increase_only")
        with pytest.raises(SchemaError, match="ordered kind"):
            attr.validate()

    def test_ordered_needs_order_list(self):
        attr = AttributeSchema(name="o", kind="ordered_categorical")
        with pytest.raises(SchemaError, match="category_order"):
            attr.validate()


class TestTransitionFeasible:
    def encoded(self):
        schema = [
            AttributeSchema(name="age", kind="continuous", constraint="increase_only"),
            AttributeSchema(name="sex", kind="binary", constraint="immutable"),
        ]
        rows = [
            {"age": "20", "sex": "m", "label": "0", "group": "a"},
            {"age": "30", "sex": "m", "label": "0", "group": "a"},
            {"age": "40", "sex": "f", "label": "1", "group": "a"},
        ]
        return encode(table_of(rows, schema))

    def test_reflexive(self):
        matrix = self.encoded()
        for i in range(3):
            assert transition_feasible(matrix.values[i], matrix.values[i], matrix.schema)

    def test_direction_violation(self):
        matrix = self.encoded()
        assert transition_feasible(matrix.values[0], matrix.values[1], matrix.schema)
        assert not transition_feasible(matrix.values[1], matrix.values[0], matrix.schema)

    def test_immutable_violation(self):
        matrix = self.encoded()
        assert not transition_feasible(matrix.values[1], matrix.values[2], matrix.schema)

    def test_one_hot_immutable_whole_span(self):
        schema = [AttributeSchema(name="c", kind="unordered_categorical", constraint="immutable")]
        rows = [{"c": v, "label": "0", "group": "a"} for v in ["x", "y"]]
        matrix = encode(table_of(rows, schema))
        assert not transition_feasible(matrix.values[0], matrix.values[1], matrix.schema)
        assert transition_feasible(matrix.values[0], matrix.values[0], matrix.schema)

    def test_mask_matches_pairwise_calls(self):
        matrix = self.encoded()
        mask = feasibility_mask(matrix)
        for i in range(3):
            for j in range(3):
                assert mask[i, j] == transition_feasible(
                    matrix.values[i], matrix.values[j], matrix.schema
                )

    def test_directional_antisymmetry_random(self):
        rng = np.random.default_rng(11)
        schema = [AttributeSchema(name="x", kind="continuous", constraint="increase_only")]
        rows = [{"x": str(rng.random()), "label": "0", "group": "a"} for _ in range(12)]
        matrix = encode(table_of(rows, schema))
        for i in range(12):
            for j in range(12):
                a, b = matrix.values[i], matrix.values[j]
                if transition_feasible(a, b, matrix.schema) and a[0] != b[0]:
                    assert not transition_feasible(b, a, matrix.schema)
