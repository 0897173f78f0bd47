"""End-to-end command-line tests driven through main()."""

from __future__ import annotations

import hashlib
import json

import pytest

from scmkit.cli import main
from scmkit.distributions import uniform_int
from scmkit.graphs import CausalGraph
from scmkit.model import ScmModel
from scmkit.serde import read_graph, read_scm, write_graph, write_scm


def make_scm_file(tmp_path, name="model.scm.json"):
    model = ScmModel()
    model.add_endogenous("A", "U + 5")
    model.add_exogenous("U", uniform_int(3, 8))
    model.add_endogenous("Effect", "A * 2")
    path = tmp_path / name
    path.write_bytes(write_scm(model))
    return str(path)


def make_graph_file(tmp_path, name, endo, exo, edges):
    path = tmp_path / name
    path.write_bytes(write_graph(CausalGraph(endo, exo, edges)))
    return str(path)


def tree(directory):
    return {p.name: p.read_bytes() for p in directory.iterdir()}


# --- gen-graphs ---------------------------------------------------------------


def test_gen_graphs_writes_files_and_manifest(tmp_path, capsys):
    out = tmp_path / "graphs"
    argv = [
        "gen-graphs", "--n-endo", "4", "--n-exo", "2",
        "--count", "5", "--seed", "11", "--out", str(out),
    ]
    assert main(argv) == 0
    assert "wrote 5 graphs" in capsys.readouterr().out
    names = sorted(p.name for p in out.iterdir())
    assert names == [f"graph_{i:03d}.graph.json" for i in range(5)] + ["manifest.json"]
    graphs = [read_graph((out / f"graph_{i:03d}.graph.json").read_bytes()) for i in range(5)]
    assert len({g.edges for g in graphs}) == 5
    manifest = json.loads((out / "manifest.json").read_bytes())
    assert manifest["command"] == "gen-graphs"
    assert manifest["seed"] == 11
    for name, digest in manifest["outputs"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest


def test_gen_graphs_rerun_is_byte_identical(tmp_path):
    argv = ["gen-graphs", "--n-endo", "3", "--count", "4", "--seed", "2"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    assert tree(tmp_path / "a") == tree(tmp_path / "b")


def test_gen_graphs_exhaustion_exit_code(tmp_path, capsys):
    argv = [
        "gen-graphs", "--n-endo", "2", "--count", "4",
        "--seed", "1", "--out", str(tmp_path / "g"),
    ]
    assert main(argv) == 4
    assert "error:" in capsys.readouterr().err


def test_gen_graphs_bad_config_exit_code(tmp_path, capsys):
    argv = [
        "gen-graphs", "--n-endo", "3", "--count", "2", "--edge-prob", "1.5",
        "--seed", "1", "--out", str(tmp_path / "g"),
    ]
    assert main(argv) == 2
    assert "edge_prob" in capsys.readouterr().err


# --- gen-scms -----------------------------------------------------------------


def test_gen_scms_from_graphs(tmp_path, capsys):
    graphs_dir = tmp_path / "graphs"
    main(["gen-graphs", "--n-endo", "4", "--n-exo", "3", "--count", "3",
          "--seed", "5", "--out", str(graphs_dir)])
    out = tmp_path / "scms"
    argv = ["gen-scms", "--from-graphs", str(graphs_dir), "--seed", "9", "--out", str(out)]
    assert main(argv) == 0
    assert "wrote 3 models" in capsys.readouterr().out
    for i in range(3):
        model = read_scm((out / f"scm_{i:03d}.scm.json").read_bytes())
        graph = read_graph((graphs_dir / f"graph_{i:03d}.graph.json").read_bytes())
        assert model.effective_graph() == graph


def test_gen_scms_standalone(tmp_path):
    out = tmp_path / "scms"
    argv = [
        "gen-scms", "--n-endo", "3", "--n-exo", "2", "--count", "4",
        "--functions", "linear", "--exo-dist", "uniform:-1,1",
        "--seed", "3", "--out", str(out),
    ]
    assert main(argv) == 0
    models = [read_scm((out / f"scm_{i:03d}.scm.json").read_bytes()) for i in range(4)]
    for model in models:
        assert len(model.endogenous_names) == 3
        assert model.distribution(model.exogenous_names[0]).kind == "uniform"


def test_gen_scms_requires_count_or_graphs(tmp_path, capsys):
    argv = ["gen-scms", "--seed", "1", "--out", str(tmp_path / "s")]
    assert main(argv) == 2
    assert "need --n-endo and --count" in capsys.readouterr().err


@pytest.mark.parametrize(
    "flag,value",
    [
        ("--functions", "linear,quadratic"),
        ("--exo-dist", "gauss"),
        ("--exo-dist", "mystery:0,1"),
        ("--exo-dist", "gauss:0"),
        ("--exo-dist", "gauss:a,b"),
        ("--exo-dist", "gauss:0,-1"),
    ],
)
def test_gen_scms_bad_options_are_usage_errors(tmp_path, capsys, flag, value):
    argv = [
        "gen-scms", "--n-endo", "2", "--count", "1",
        flag, value, "--seed", "1", "--out", str(tmp_path / "s"),
    ]
    assert main(argv) == 2
    assert "error:" in capsys.readouterr().err


# --- sample -------------------------------------------------------------------


def test_sample_stdout_csv(tmp_path, capsys):
    scm = make_scm_file(tmp_path)
    assert main(["sample", "--scm", scm, "--n", "5", "--seed", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "A,Effect,U"
    assert len(lines) == 6
    for line in lines[1:]:
        a, effect, u = map(float, line.split(","))
        assert a == u + 5.0
        assert effect == a * 2.0


def test_sample_zero_rows(tmp_path, capsys):
    scm = make_scm_file(tmp_path)
    assert main(["sample", "--scm", scm, "--n", "0", "--seed", "1"]) == 0
    assert capsys.readouterr().out == "A,Effect,U\n"


def test_sample_with_intervention(tmp_path, capsys):
    scm = make_scm_file(tmp_path)
    argv = ["sample", "--scm", scm, "--n", "8", "--seed", "2", "--do", "Effect=A + 1"]
    assert main(argv) == 0
    for line in capsys.readouterr().out.splitlines()[1:]:
        a, effect, _ = map(float, line.split(","))
        assert effect == a + 1.0


def test_sample_out_file_matches_stdout(tmp_path, capsys):
    scm = make_scm_file(tmp_path)
    path = tmp_path / "rows.csv"
    assert main(["sample", "--scm", scm, "--n", "3", "--seed", "7", "--out", str(path)]) == 0
    capsys.readouterr()
    assert main(["sample", "--scm", scm, "--n", "3", "--seed", "7"]) == 0
    assert path.read_bytes().decode("utf-8") == capsys.readouterr().out


@pytest.mark.parametrize(
    "do,code",
    [
        ("A=Effect + 1", 3),  # cycle
        ("A=1 +", 3),  # parse error
        ("A=Zap", 3),  # undeclared variable
        ("U=1", 3),  # exogenous target
        ("A5", 2),  # missing '='
    ],
)
def test_sample_bad_interventions(tmp_path, capsys, do, code):
    scm = make_scm_file(tmp_path)
    assert main(["sample", "--scm", scm, "--n", "1", "--seed", "1", "--do", do]) == code
    assert "error:" in capsys.readouterr().err


def test_sample_missing_file_is_usage_error(tmp_path, capsys):
    argv = ["sample", "--scm", str(tmp_path / "nope.scm.json"), "--n", "1", "--seed", "1"]
    assert main(argv) == 2
    assert "error:" in capsys.readouterr().err


# --- env-run ------------------------------------------------------------------


def write_menu(tmp_path):
    path = tmp_path / "menu.json"
    menu = [{"target": "A", "expr": "5"}, {"target": "Effect", "expr": "A + 1"}]
    path.write_text(json.dumps(menu))
    return str(path)


def test_env_run_record_schema(tmp_path, capsys):
    scm = make_scm_file(tmp_path)
    out = tmp_path / "episodes.jsonl"
    argv = [
        "env-run", "--scm", scm, "--interventions", write_menu(tmp_path),
        "--episodes", "2", "--horizon", "3", "--seed", "4", "--out", str(out),
    ]
    assert main(argv) == 0
    assert "wrote 6 steps" in capsys.readouterr().out
    lines = out.read_text().splitlines()
    assert len(lines) == 6
    for k, line in enumerate(lines):
        record = json.loads(line)
        assert set(record) == {
            "t", "action_indices", "observation", "reward",
            "terminated", "truncated", "sample",
        }
        assert record["t"] == k % 3
        assert record["truncated"] == (record["t"] == 2)
        assert record["terminated"] is False
        assert len(record["observation"]) == 2
        assert set(record["sample"]) == {"A", "Effect", "U"}


def test_env_run_none_policy_is_observational(tmp_path):
    scm = make_scm_file(tmp_path)
    out = tmp_path / "episodes.jsonl"
    argv = [
        "env-run", "--scm", scm, "--interventions", write_menu(tmp_path),
        "--policy", "none", "--horizon", "4", "--seed", "4", "--out", str(out),
    ]
    assert main(argv) == 0
    for line in out.read_text().splitlines():
        record = json.loads(line)
        assert record["action_indices"] == []
        assert record["sample"]["Effect"] == record["sample"]["A"] * 2.0


def test_env_run_rerun_is_byte_identical(tmp_path):
    scm = make_scm_file(tmp_path)
    menu = write_menu(tmp_path)
    argv = ["env-run", "--scm", scm, "--interventions", menu,
            "--episodes", "3", "--seed", "8"]
    assert main(argv + ["--out", str(tmp_path / "a.jsonl")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b.jsonl")]) == 0
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_env_run_rejects_bad_menu(tmp_path, capsys):
    scm = make_scm_file(tmp_path)
    path = tmp_path / "menu.json"
    path.write_text(json.dumps([{"target": "A"}]))
    argv = ["env-run", "--scm", scm, "--interventions", str(path),
            "--seed", "1", "--out", str(tmp_path / "o.jsonl")]
    assert main(argv) == 3
    assert "error:" in capsys.readouterr().err


# --- eval ---------------------------------------------------------------------


def test_eval_prints_metrics(tmp_path, capsys):
    truth = make_graph_file(
        tmp_path, "truth.graph.json",
        ("A", "B", "C"), (), {("A", "B"), ("B", "C")},
    )
    pred = make_graph_file(
        tmp_path, "pred.graph.json",
        ("A", "B", "C"), (), {("A", "B"), ("C", "B")},
    )
    assert main(["eval", "--pred", pred, "--truth", truth]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc == {"tp": 1, "fp": 1, "fn": 1, "tn": 3, "f1": 0.5, "tpr": 0.5}


def test_eval_perfect_prediction(tmp_path, capsys):
    truth = make_graph_file(
        tmp_path, "t.graph.json", ("A", "B"), ("U0",), {("A", "B"), ("U0", "A")},
    )
    assert main(["eval", "--pred", truth, "--truth", truth]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["f1"] == 1.0 and doc["tpr"] == 1.0 and doc["fp"] == 0


def test_eval_dimension_mismatch(tmp_path, capsys):
    truth = make_graph_file(tmp_path, "t.graph.json", ("A", "B"), (), set())
    pred = make_graph_file(tmp_path, "p.graph.json", ("A", "C"), (), set())
    assert main(["eval", "--pred", pred, "--truth", truth]) == 3
    assert "error:" in capsys.readouterr().err


# --- usecase ------------------------------------------------------------------


def test_usecase_writes_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    argv = [
        "usecase", "--seed", "13", "--out", str(out),
        "--scm-count", "4", "--samples", "40", "--n-endo", "3", "--n-exo", "2",
    ]
    assert main(argv) == 0
    printed = capsys.readouterr().out
    assert "regime" in printed and "unconfounded" in printed
    records = json.loads((out / "metrics.json").read_bytes())
    assert {r["regime"] for r in records} == {"unconfounded", "confounded"}
    assert (out / "metrics.txt").read_text() == printed
    manifest = json.loads((out / "manifest.json").read_bytes())
    assert set(manifest["outputs"]) == {"metrics.json", "metrics.txt"}


def test_usecase_rerun_is_byte_identical(tmp_path):
    argv = ["usecase", "--seed", "21", "--scm-count", "2", "--samples", "25",
            "--n-endo", "3", "--n-exo", "1"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    assert tree(tmp_path / "a") == tree(tmp_path / "b")


def test_usecase_bad_threshold_is_usage_error(tmp_path, capsys):
    argv = ["usecase", "--seed", "1", "--out", str(tmp_path / "r"),
            "--threshold", "2.0", "--scm-count", "2", "--samples", "10"]
    assert main(argv) == 2
    assert "error:" in capsys.readouterr().err


# --- parser behaviour ---------------------------------------------------------


def test_missing_required_flags_exit_two(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["gen-graphs", "--count", "2", "--seed", "1", "--out", str(tmp_path)])
    assert info.value.code == 2


def test_unknown_subcommand_exits_two():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_nonpositive_count_exits_two(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["gen-graphs", "--n-endo", "2", "--count", "0",
              "--seed", "1", "--out", str(tmp_path)])
    assert info.value.code == 2


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "scmkit" in capsys.readouterr().out
