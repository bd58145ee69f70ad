import io
import json

import pytest

from chern_simons_graph.cli import run
from chern_simons_graph.fixtures import fixture_path

K2 = str(fixture_path("k2"))
TORUS = str(fixture_path("torus4x4"))


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out=out)
    return code, out.getvalue()


def test_solve_converges_above_critical_and_verifies(tmp_path):
    sol = tmp_path / "v.json"
    code, text = call("solve", "--graph", K2, "--vortex", "x1", "--lambda", "60", "--b", "1", "--solution-out", str(sol))
    report = json.loads(text)
    assert code == 0 and report["status"] == "converged"
    assert report["final_residual_sup"] < 1e-9
    code, text = call("verify", "--graph", K2, "--vortex", "x1", "--lambda", "60", "--b", "1", "--solution", str(sol))
    assert code == 0 and json.loads(text)["classification"] == "solution"


def test_solve_report_feeds_verify_directly(tmp_path):
    code, text = call("solve", "--graph", K2, "--vortex", "x1", "--lambda", "60", "--b", "1")
    path = tmp_path / "report.json"
    path.write_text(text)
    code, text = call("verify", "--graph", K2, "--vortex", "x1", "--lambda", "60", "--b", "1", "--solution", str(path))
    assert json.loads(text)["classification"] == "solution"


@pytest.mark.parametrize("lam", ["10", "40"])
def test_solve_diverges_without_solutions(lam):
    # 10 is below the necessary bound 8 pi; 40 is above it but below the critical coupling
    code, text = call("solve", "--graph", K2, "--vortex", "x1", "--lambda", lam, "--b", "1")
    assert code == 0 and json.loads(text)["status"] == "diverged"


def test_output_is_byte_deterministic():
    args = ("solve", "--graph", TORUS, "--vortex", "t00", "--lambda", "8", "--b", "1")
    assert call(*args)[1] == call(*args)[1]


def test_critical_command():
    code, text = call("critical", "--graph", K2, "--vortex", "x1", "--b", "1")
    res = json.loads(text)
    assert code == 0 and res["flagged"] is False
    assert res["bracket"][0] <= res["lambda_c"] <= res["bracket"][1]
    assert 47.4 < res["lambda_c"] < 47.5


def test_critical_inconclusive_exit_code():
    # near the fold the scheme needs far more than 40 iterations
    code, text = call("critical", "--graph", K2, "--vortex", "x1", "--b", "1", "--max-iterations", "40")
    assert code == 3
    assert json.loads(text)["inconclusive_count"] > 0


def test_multiplicity_command():
    code, text = call("multiplicity", "--graph", K2, "--vortex", "x1", "--b", "1")
    res = json.loads(text)
    assert code == 0
    assert res["separation_sup"] > 1e-4 and res["route"] in ("mountain_pass", "distinct_maximal")
    assert set(res["minimizer"]) == {"x1", "x2"}


def test_sweep_tsv():
    code, text = call(
        "sweep", "--graph", TORUS, "--vortex", "t00", "--b", "1",
        "--lambda-min", "4", "--lambda-max", "40", "--steps", "4", "--jobs", "2", "--format", "tsv",
    )
    lines = text.splitlines()
    assert code == 0
    assert lines[0].split("\t") == ["lambda", "status", "iterations", "mean_v", "J", "grad_norm_ratio"]
    assert len(lines) == 6 and lines[-1].startswith("# max_grad_norm_ratio\t")
    assert all(line.split("\t")[1] == "converged" for line in lines[1:5])


def test_poincare_command():
    code, text = call("poincare", "--graph", K2, "--vortex", "x1", "--b", "1", "--samples", "50")
    res = json.loads(text)
    assert code == 0 and res["spectral_gap"] == pytest.approx(2.0) and res["holds"]


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["solve", "--graph", K2, "--vortex", "zz", "--lambda", "60", "--b", "1"], "zz"),
        (["solve", "--graph", K2, "--vortex", "x1", "--lambda", "-1", "--b", "1"], "--lambda"),
        (["solve", "--graph", K2, "--vortex", "x1", "--lambda", "60", "--b", "0"], "--b"),
        (["solve", "--graph", "/nonexistent.json", "--vortex", "x1", "--lambda", "60", "--b", "1"], "cannot read"),
        (["solve", "--graph", K2, "--vortex", "x1", "--vortex", "x1", "--strict-distinct", "--lambda", "60", "--b", "1"], "x1"),
    ],
)
def test_validation_errors_exit_1(argv, needle, capsys):
    code, _ = call(*argv)
    err = capsys.readouterr().err.strip()
    assert code == 1
    assert needle in err and "\n" not in err


def test_malformed_and_disconnected_graphs(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert call("solve", "--graph", str(bad), "--vortex", "a", "--lambda", "1", "--b", "1")[0] == 1
    assert "invalid JSON" in capsys.readouterr().err
    dis = tmp_path / "dis.json"
    dis.write_text(json.dumps({"vertices": [{"id": "a"}, {"id": "b"}], "edges": []}))
    assert call("solve", "--graph", str(dis), "--vortex", "a", "--lambda", "1", "--b", "1")[0] == 1
    assert "disconnected" in capsys.readouterr().err


def test_missing_arguments_exit_1(capsys):
    assert call("solve", "--graph", K2)[0] == 1
    assert call("--help")[0] == 0
