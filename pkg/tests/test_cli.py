import json

import pytest

from ppoisson.cli import EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE, main
from ppoisson.regularity import beta


def run(*argv):
    return main([str(a) for a in argv])


def without_metadata(path):
    rep = json.loads(path.read_text())
    rep.pop("metadata")
    return rep


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for name in ("solve", "oracle", "exponent", "qr-check", "conjugate", "reproduce"):
        assert name in out


def test_oracle_then_exponent(tmp_path):
    field = tmp_path / "lq.csv"
    assert run("oracle", "--profile", "lq", "--p", 3, "--q", 4, "--spacing", 1 / 256, "--out", field) == EXIT_OK
    out = tmp_path / "exp.json"
    assert run("exponent", "--field", field, "--center", "0,0", "--beta-from", "p=3,q=4", "--out", out) == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["theoretical_beta"] == beta(3, 4) == 1.25
    assert rep["theoretical_beta_minus_1"] == pytest.approx(0.25)
    bm1 = rep["theoretical_beta_minus_1"]
    assert bm1 <= rep["gradient_fitted_exponent"] <= bm1 + 0.15
    assert rep["config"]["field"] == str(field)


def test_unknown_label_lists_valid(tmp_path, capsys):
    code = run("solve", "--p", 3, "--spacing", 0.125, "--rhs", "nonsense", "--out", tmp_path / "v.csv", "--report", tmp_path / "r.json")
    assert code == EXIT_USAGE
    err = capsys.readouterr().err
    assert "nonsense" in err and "torsional" in err and "zero" in err


def test_malformed_csv_names_location(tmp_path, capsys):
    field = tmp_path / "f.csv"
    run("oracle", "--profile", "torsional", "--p", 3, "--spacing", 0.25, "--out", field)
    lines = field.read_text().splitlines()
    cells = lines[4].split(",")
    cells[3] = "oops"
    lines[4] = ",".join(cells)
    field.write_text("\n".join(lines) + "\n")
    assert run("exponent", "--field", field, "--center", "0,0", "--out", tmp_path / "e.json") == EXIT_USAGE
    err = capsys.readouterr().err
    assert "row" in err and "col" in err


def test_missing_option_is_usage_error(tmp_path):
    assert run("oracle", "--profile", "torsional", "--spacing", 0.25, "--out", tmp_path / "f.csv") == EXIT_USAGE


def test_identical_runs_identical_reports(tmp_path):
    reps = []
    for k in range(2):
        rep = tmp_path / f"r{k}.json"
        out = tmp_path / f"v{k}.csv"
        assert run("solve", "--p", 3, "--spacing", 1 / 16, "--rhs", "torsional", "--boundary", "torsional", "--out", out, "--report", rep) == EXIT_OK
        reps.append(rep)
    a, b = (without_metadata(r) for r in reps)
    for r in (a, b):
        r["config"].pop("out"), r["config"].pop("report")
    assert a == b
    assert (tmp_path / "v0.csv").read_bytes() == (tmp_path / "v1.csv").read_bytes()
    assert a["converged"] and isinstance(a["eps_schedule"], list)


def test_not_converged_exit_code(tmp_path):
    rep = tmp_path / "r.json"
    code = run("solve", "--p", 3, "--spacing", 1 / 16, "--rhs", "torsional", "--boundary", "torsional", "--max-outer", 2, "--out", tmp_path / "v.csv", "--report", rep)
    assert code == EXIT_NOT_CONVERGED
    assert json.loads(rep.read_text())["converged"] is False


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# oracle config\nprofile = torsional\np = 3\nspacing = 0.25\n")
    rep = tmp_path / "r.json"
    assert run("oracle", "--config", cfg, "--spacing", 0.125, "--out", tmp_path / "f.csv", "--report", rep) == EXIT_OK
    conf = json.loads(rep.read_text())["config"]
    assert conf["spacing"] == 0.125 and conf["p"] == 3.0 and conf["profile"] == "torsional"
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run("oracle", "--config", bad, "--out", tmp_path / "g.csv") == EXIT_USAGE


def test_qr_check_and_conjugate(tmp_path):
    field = tmp_path / "u.csv"
    assert run("oracle", "--profile", "p-harmonic", "--p", 4, "--domain", "annulus:0.2,0.9", "--spacing", 1 / 64, "--out", field) == EXIT_OK
    out = tmp_path / "qr.json"
    assert run("qr-check", "--field", field, "--p", 4, "--mode", "dilatation", "--out", out) == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["violations"] == 0 and rep["sup_ratio"] <= 0.5 + 0.05
    sq = tmp_path / "sq.csv"
    run("oracle", "--profile", "p-harmonic", "--p", 1.5, "--domain", "square:0.2", "--origin", "0.55,0", "--spacing", 1 / 64, "--out", sq)
    rep = tmp_path / "c.json"
    assert run("conjugate", "--field", sq, "--p", 1.5, "--base", "12,12", "--out", tmp_path / "v.csv", "--report", rep) == EXIT_OK
    c = json.loads(rep.read_text())
    assert c["p_prime"] == 3.0 and c["norm_identity_error"] < 5e-2


def test_reproduce_case(tmp_path, capsys):
    out = tmp_path / "t.json"
    assert run("reproduce", "--case", "torsional-p3", "--out", out) == EXIT_OK
    rep = json.loads(out.read_text())
    assert "fitted_exponent" in rep and rep["converged"] and rep["passed"]
    assert run("reproduce", "--case", "exponents") == EXIT_OK
    assert json.loads(capsys.readouterr().out)["passed"] is True
    assert run("reproduce", "--case", "bogus") == EXIT_USAGE
