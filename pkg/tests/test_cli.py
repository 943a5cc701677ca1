import json
import os

import pytest
from click.testing import CliRunner

from cfaudit.cli import main
from cfaudit.config import build_config
from cfaudit.errors import UsageError
from cfaudit.synth import synth_fixture


@pytest.fixture
def f1_workdir(tmp_path):
    """The canonical fixture rendered as CSV + config via the synth template."""
    result = synth_fixture([3, 2], template="f1")
    data = tmp_path / "dataset.csv"
    result.write_csv(str(data))
    config = {
        "dataset": str(data),
        "label_column": "label",
        "group_column": "group",
        "epsilon": result.epsilon,
        "attributes": result.schema_config(),
        "out": str(tmp_path / "out"),
        "metrics": {
            "k_values": [1, 2],
            "d_values": [0.3],
            "c_values": [1.0],
            "d_range": [0.05, 0.3],
        },
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    return tmp_path, str(path)


def invoke(args):
    runner = CliRunner()
    return runner.invoke(main, args, catch_exceptions=False)


class TestEncodeCommand:
    def test_writes_encoded_csv(self, f1_workdir):
        tmp_path, config = f1_workdir
        result = invoke(["encode", "--config", config])
        assert result.exit_code == 0
        encoded = (tmp_path / "out" / "encoded.csv").read_text().splitlines()
        assert encoded[0] == "row_id,label,group,v"
        assert len(encoded) == 7


class TestGraphCommands:
    def test_build_writes_edges_and_meta(self, f1_workdir):
        tmp_path, config = f1_workdir
        result = invoke(["graph", "build", "--config", config])
        assert result.exit_code == 0
        lines = (tmp_path / "out" / "graph.csv").read_text().splitlines()
        assert lines[0] == "src,dst,cost,weight"
        meta = json.loads((tmp_path / "out" / "graph.meta.json").read_text())
        assert meta["epsilon"] == 0.35
        assert len(meta["nodes"]) == 6

    def test_sweep_rows(self, f1_workdir):
        tmp_path, config = f1_workdir
        result = invoke(["graph", "sweep", "--config", config, "--epsilons", "0.05,0.35"])
        assert result.exit_code == 0
        lines = (tmp_path / "out" / "sweep.csv").read_text().splitlines()
        assert lines[0] == "epsilon,edges,components,singletons,largest_fraction"
        assert len(lines) == 3
        assert lines[1].startswith("0.05,0,6,6")

    def test_sweep_rejects_descending(self, f1_workdir):
        _, config = f1_workdir
        runner = CliRunner()
        result = runner.invoke(
            main, ["graph", "sweep", "--config", config, "--epsilons", "0.35,0.05"]
        )
        assert result.exit_code != 0


class TestSolveCommands:
    def test_max_coverage(self, f1_workdir):
        tmp_path, config = f1_workdir
        result = invoke(
            ["solve", "max-coverage", "--config", config, "--k", "1", "--d", "0.3"]
        )
        assert result.exit_code == 0
        payload = json.loads((tmp_path / "out" / "solution_maxcov_a.json").read_text())
        assert payload["coverage"] == 2
        assert payload["selected"] == [3]
        assert payload["optimal"] is True

    def test_k_center(self, f1_workdir):
        tmp_path, config = f1_workdir
        result = invoke(
            ["solve", "k-center", "--config", config, "--k", "2", "--c", "1.0"]
        )
        assert result.exit_code == 0
        payload = json.loads((tmp_path / "out" / "solution_kcenter_a.json").read_text())
        assert payload["max_cost"] == pytest.approx(0.2, abs=1e-12)
        assert payload["coverage"] == 3

    def test_method_flag_greedy(self, f1_workdir):
        tmp_path, config = f1_workdir
        result = invoke(
            [
                "solve", "max-coverage", "--config", config,
                "--k", "1", "--d", "0.3", "--method", "greedy",
            ]
        )
        assert result.exit_code == 0
        payload = json.loads((tmp_path / "out" / "solution_maxcov_a.json").read_text())
        assert payload["method"] == "greedy"


class TestAuditCommand:
    def test_f1_end_to_end(self, f1_workdir):
        tmp_path, config = f1_workdir
        result = invoke(["audit", "--config", config])
        assert result.exit_code == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        section = report["groups"]["a"]
        assert section["m"] == 2
        assert section["k0"] == 2
        assert section["d0"] == pytest.approx(0.2, abs=1e-12)
        assert section["audited"] == 3
        assert section["excluded"] == []
        assert (tmp_path / "out" / "graph.csv").exists()
        curve = section["kauc"][0]["curve_file"]
        assert (tmp_path / "out" / curve).exists()

    def test_single_group_value(self, f1_workdir):
        # Group b holds only the scale-pinning row; its section is still present.
        tmp_path, config = f1_workdir
        invoke(["audit", "--config", config])
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert "b" in report["groups"]

    def test_epsilon_validated_before_io(self, tmp_path):
        config = {
            "dataset": str(tmp_path / "missing.csv"),
            "epsilon": -1.0,
            "attributes": [{"name": "v", "kind": "continuous"}],
        }
        with pytest.raises(UsageError, match="epsilon"):
            build_config(config)

    def test_flag_overrides_config(self, f1_workdir):
        tmp_path, config = f1_workdir
        out2 = tmp_path / "other"
        result = invoke(["audit", "--config", config, "--out", str(out2)])
        assert result.exit_code == 0
        assert (out2 / "report.json").exists()
        report = json.loads((out2 / "report.json").read_text())
        assert report["config"]["resolved"]["epsilon"] == 0.35

    def test_determinism_byte_identical(self, f1_workdir):
        tmp_path, config = f1_workdir
        invoke(["audit", "--config", config, "--out", str(tmp_path / "r1")])
        invoke(["audit", "--config", config, "--out", str(tmp_path / "r2")])
        first = (tmp_path / "r1" / "report.json").read_bytes()
        second = (tmp_path / "r2" / "report.json").read_bytes()
        assert first == second
        for name in sorted(os.listdir(tmp_path / "r1" / "curves")):
            a = (tmp_path / "r1" / "curves" / name).read_bytes()
            b = (tmp_path / "r2" / "curves" / name).read_bytes()
            assert a == b


class TestAcfCommand:
    def test_frequencies_reported(self, f1_workdir):
        tmp_path, config = f1_workdir
        result = invoke(["acf", "--config", config])
        assert result.exit_code == 0
        payload = json.loads((tmp_path / "out" / "acf.json").read_text())
        assert payload["a"]["v"] == 1.0


class TestSynthCommand:
    def test_generates_dataset_and_config(self, tmp_path):
        out = tmp_path / "synth"
        result = invoke(
            ["synth", "--sizes", "3,2", "--epsilon", "0.2", "--seed", "1", "--out", str(out)]
        )
        assert result.exit_code == 0
        assert (out / "dataset.csv").exists()
        config = json.loads((out / "config.json").read_text())
        assert config["epsilon"] == 0.2

    def test_template_roundtrip_audit(self, tmp_path):
        out = tmp_path / "synth"
        invoke(["synth", "--sizes", "3,2", "--template", "f1", "--out", str(out)])
        result = invoke(["audit", "--config", str(out / "config.json")])
        assert result.exit_code == 0
        report = json.loads((out / "audit" / "report.json").read_text())
        assert report["groups"]["a"]["k0"] == 2
