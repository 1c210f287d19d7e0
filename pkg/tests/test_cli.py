import json

import pytest
from click.testing import CliRunner

from xplan.cli import main
from xplan.data_model import save_csv


@pytest.fixture(scope="module")
def workdir(tmp_path_factory, planted):
    """Planted dataset written out as the CSV + schema the CLI consumes."""
    root = tmp_path_factory.mktemp("cli")
    save_csv(planted, root / "data.csv")
    schema = {
        "class_mode": "boolean-from-count",
        "features": [
            {"name": f.name, "kind": f.kind, "role": f.role}
            for f in planted.features
        ],
    }
    (root / "schema.json").write_text(json.dumps(schema))
    return root


def base_args(workdir, *extra):
    return [
        "--data", str(workdir / "data.csv"),
        "--schema", str(workdir / "schema.json"),
        "--trees", "15",
        "--seed", "1",
        *extra,
    ]


runner = CliRunner()


class TestPlan:
    def test_emits_json_per_row(self, workdir):
        res = runner.invoke(
            main, ["plan"] + base_args(workdir, "--method", "xtree", "--rows", "0,1,2")
        )
        assert res.exit_code == 0, res.output
        lines = res.output.strip().splitlines()
        assert len(lines) == 3
        for i, line in enumerate(lines):
            blob = json.loads(line)
            assert blob["row"] == i
            assert blob["method"] == "xtree"
            assert isinstance(blob["deltas"], list)

    def test_all_methods(self, workdir):
        res = runner.invoke(
            main, ["plan"] + base_args(workdir, "--method", "all", "--rows", "0")
        )
        assert res.exit_code == 0, res.output
        methods = [json.loads(l)["method"] for l in res.output.strip().splitlines()]
        assert methods == ["cd", "cdfs", "bic", "xtree"]

    def test_deterministic_output(self, workdir):
        args = ["plan"] + base_args(workdir, "--method", "cd", "--rows", "0,5")
        out1 = runner.invoke(main, args).output
        out2 = runner.invoke(main, args).output
        assert out1 == out2

    def test_missing_data_file_is_usage_error(self, workdir):
        res = runner.invoke(main, [
            "plan", "--data", str(workdir / "nope.csv"),
            "--schema", str(workdir / "schema.json"),
        ])
        assert res.exit_code != 0


class TestEval:
    def test_text_report_and_artifacts(self, workdir, tmp_path):
        out = tmp_path / "res"
        res = runner.invoke(main, ["eval"] + base_args(
            workdir, "--methods", "identity,xtree", "--repeats", "2",
            "--out", str(out)))
        assert res.exit_code == 0, res.output
        assert "Rank" in res.output and "xtree" in res.output
        assert (out / "results.jsonl").exists()
        assert (out / "results.csv").exists()
        assert len((out / "results.jsonl").read_text().strip().splitlines()) == 4

    def test_json_format(self, workdir, tmp_path):
        res = runner.invoke(main, ["eval"] + base_args(
            workdir, "--methods", "identity,xtree", "--repeats", "2",
            "--out", str(tmp_path / "r"), "--format", "json"))
        assert res.exit_code == 0, res.output
        ranked = json.loads(res.output.strip().splitlines()[-1])
        assert {e["method"] for e in ranked} == {"identity", "xtree"}
        assert all({"rank", "median", "iqr"} <= set(e) for e in ranked)

    def test_byte_identical_reruns(self, workdir, tmp_path):
        args1 = ["eval"] + base_args(workdir, "--methods", "xtree", "--repeats", "2",
                                     "--out", str(tmp_path / "a"))
        args2 = ["eval"] + base_args(workdir, "--methods", "xtree", "--repeats", "2",
                                     "--out", str(tmp_path / "b"))
        out1 = runner.invoke(main, args1)
        out2 = runner.invoke(main, args2)
        assert out1.output == out2.output
        assert (tmp_path / "a/results.jsonl").read_bytes() == \
               (tmp_path / "b/results.jsonl").read_bytes()

    def test_unknown_method_exits_1(self, workdir, tmp_path):
        res = runner.invoke(main, ["eval"] + base_args(
            workdir, "--methods", "magic", "--out", str(tmp_path / "r")))
        assert res.exit_code == 1

    def test_weak_predictor_exits_2(self, workdir, tmp_path):
        import csv
        import random

        noisy = tmp_path / "noise.csv"
        rng = random.Random(0)
        with open(noisy, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n0", "n1", "n2", "n3", "n4", "n5", "n6", "n7", "loc", "bug"])
            for _ in range(120):
                w.writerow([round(rng.random(), 3) for _ in range(9)]
                           + [int(rng.random() < 0.5)])
        res = runner.invoke(main, [
            "eval", "--data", str(noisy), "--schema", str(workdir / "schema.json"),
            "--trees", "15", "--methods", "identity", "--repeats", "1",
            "--out", str(tmp_path / "r"),
        ])
        assert res.exit_code == 2
        try:
            err = res.output + res.stderr
        except ValueError:  # stderr mixed into output on older click
            err = res.output
        assert "gate" in err

    def test_config_file_defaults_with_flag_override(self, workdir, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "data": str(workdir / "data.csv"),
            "schema": str(workdir / "schema.json"),
            "trees": 15,
            "repeats": 1,
            "methods": "identity",
            "out": str(tmp_path / "from_cfg"),
        }))
        res = runner.invoke(main, ["eval", "--config", str(cfg),
                                   "--out", str(tmp_path / "override")])
        assert res.exit_code == 0, res.output
        assert (tmp_path / "override" / "results.jsonl").exists()
        assert not (tmp_path / "from_cfg").exists()


class TestReport:
    def test_report_from_saved_results(self, workdir, tmp_path):
        out = tmp_path / "res"
        runner.invoke(main, ["eval"] + base_args(
            workdir, "--methods", "identity,xtree,cd", "--repeats", "2",
            "--out", str(out)))
        res = runner.invoke(main, ["report", str(out / "results.jsonl")])
        assert res.exit_code == 0, res.output
        assert "Rank" in res.output
        assert "Change frequency" in res.output
        assert "Trust" in res.output

    def test_missing_file_exits_1(self, tmp_path):
        res = runner.invoke(main, ["report", str(tmp_path / "nothing.jsonl")])
        assert res.exit_code == 1

    def test_empty_file_exits_1(self, tmp_path):
        p = tmp_path / "empty.jsonl"
        p.write_text("")
        res = runner.invoke(main, ["report", str(p)])
        assert res.exit_code == 1


class TestHelp:
    def test_group_lists_commands(self):
        res = runner.invoke(main, ["--help"])
        assert res.exit_code == 0
        for cmd in ("plan", "eval", "report"):
            assert cmd in res.output

    def test_eval_help_documents_defaults(self):
        res = runner.invoke(main, ["eval", "--help"])
        assert res.exit_code == 0
        assert "0.33" in res.output   # beta default
        assert "0.5" in res.output    # gamma default
        assert "40" in res.output     # repeats default
