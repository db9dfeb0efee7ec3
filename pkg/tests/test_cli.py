import json
import math

import pytest

from halflap.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(autouse=True)
def _outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("HALFLAP_OUTPUT_DIR", str(tmp_path))
    return tmp_path


def test_eigen_symmetric_domain(capsys, _outdir):
    code, out, _ = _run(capsys, "eigen", "--domain", "-1,1", "--n", "512")
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == 1 and rep["n"] == 512
    assert rep["lambda1_spec"] == pytest.approx(1.1583, abs=1e-3)
    assert (_outdir / "eigenfunction.csv").read_text().startswith("x,u\n")


def test_mp_solve_auto_mu(capsys, _outdir):
    code, out, _ = _run(capsys, "mp-solve", "--nonlinearity", "ex1", "--mu", "auto")
    assert code == 0
    rep = json.loads(out)
    assert rep["mu"] == pytest.approx(rep["lambda1_X"] / (4 * math.pi))
    assert rep["residual"] <= 1e-8 and rep["nontrivial"] and rep["level_c"] > 0
    assert rep["hypothesis_warnings"] == []
    assert (_outdir / "mp_solution.csv").exists()


def test_mp_solve_ex2_reports_level(capsys):
    code, out, _ = _run(capsys, "mp-solve", "--nonlinearity", "ex2", "--n", "128")
    rep = json.loads(out)
    assert code == 0 and rep["level_report"]["threshold"] == pytest.approx(math.pi / 2)


def test_mp_solve_without_mountain_pass_geometry(capsys):
    # mu above lambda1 / (2 pi): zero is no longer a strict local minimum
    code, out, _ = _run(capsys, "eigen", "--n", "64")
    lam = json.loads(out)["lambda1_X"]
    code, out, _ = _run(capsys, "verify-hypotheses", "--n", "64", "--mu", str(1.2 * lam / (2 * math.pi)))
    assert code == 0 and json.loads(out)["verdicts"]["H(iii)"] is False
    code, _, err = _run(capsys, "mp-solve", "--n", "64", "--mu", str(1.2 * lam / (2 * math.pi)))
    assert code == 1 and "mountain-pass geometry" in err


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["mp-solve", "--q", "3"], "1 < q < 2"),
        (["mp-solve", "--omega-hat", "4"], "omega-hat"),
        (["eigen", "--n", "0"], "at least 1"),
        (["eigen", "--domain", "1,0"], "a < b"),
        (["nonsense"], "invalid choice"),
        (["eigen", "--bogus"], "unrecognized"),
    ],
)
def test_invalid_configuration_exit_2(capsys, argv, needle):
    code, out, err = _run(capsys, *argv)
    assert code == 2
    assert needle in err


def test_numerical_failure_exit_1(capsys):
    code, _, err = _run(capsys, "solve-linear", "--n", "64", "--tol", "1e-30")
    assert code == 1 and "numerical failure" in err


def test_determinism(capsys, tmp_path):
    outs = []
    for d in ("a", "b"):
        code, out, _ = _run(capsys, "multi-solve", "--k", "2", "--n", "128", "--output-dir", str(tmp_path / d))
        assert code == 0
        outs.append((tmp_path / d / "multi_report.json").read_bytes())
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["found"] == 2


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep settings\nn = 96\ndomain = -1,1\nnonlinearity = ex2\n")
    code, out, _ = _run(capsys, "mp-solve", "--config", str(cfg), "--n", "80")
    rep = json.loads(out)
    assert code == 0 and rep["n"] == 80 and rep["domain"] == [-1.0, 1.0] and "level_report" in rep
    cfg.write_text("not a pair\n")
    assert _run(capsys, "eigen", "--config", str(cfg))[0] == 2
    cfg.write_text("unknown_key = 3\n")
    assert _run(capsys, "eigen", "--config", str(cfg))[0] == 2


def test_other_subcommands(capsys, _outdir):
    code, out, _ = _run(capsys, "assemble", "--n", "16")
    assert code == 0 and json.loads(out)["a0"] == pytest.approx(8 * math.log(2))
    assert (_outdir / "stiffness.csv").read_text().startswith("k,a_k\n")
    code, out, _ = _run(capsys, "solve-linear", "--domain", "-1,1", "--n", "127")
    assert code == 0 and json.loads(out)["l2_error_closed_form"] < 1e-2
    code, out, _ = _run(capsys, "check-hv", "--nonlinearity", "ex2", "--n", "128")
    rep = json.loads(out)
    assert code == 0 and math.isfinite(rep["sup_value"]) and rep["threshold"] == pytest.approx(math.pi / 2)
    assert _run(capsys, "check-hv", "--nonlinearity", "ex1")[0] == 2
    code, out, _ = _run(capsys, "tm-probe", "--n", "64", "--alpha-list", "0.5,0.1", "--restarts", "2")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "alpha,sup_estimate,saturated" and len(lines) == 3
    assert float(lines[1].split(",")[0]) == 0.1
    code, out, _ = _run(capsys, "polarize-test", "--trials", "40", "--domain", "-1,1", "--n", "31")
    assert code == 0 and json.loads(out)["passed"] is True


def test_verify_all_subset(capsys):
    code, out, _ = _run(capsys, "verify-all", "--only", "3,12")
    assert code == 0
    assert "2/2 criteria passed" in out and out.count("[PASS]") == 2
