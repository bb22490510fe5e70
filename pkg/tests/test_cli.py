import json
import subprocess
import sys

import pytest

from jetfactor.cli import EXIT_ERROR, EXIT_NO_FACTOR, EXIT_NOT_EXACT, EXIT_OK, EXIT_VERIFY_FAILED, main, run


def out_of(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr().out


@pytest.mark.parametrize(
    "name, code",
    [
        ("example2", EXIT_NOT_EXACT),
        ("linear", EXIT_NOT_EXACT),
        ("sine", EXIT_NOT_EXACT),
        ("exact_product", EXIT_OK),
        ("exact_exp", EXIT_OK),
        ("exact_third", EXIT_OK),
        ("bad_nonlinear", EXIT_ERROR),
        ("bad_syntax", EXIT_ERROR),
    ],
)
def test_check_exit_codes(corpus, name, code):
    assert run(["check", str(corpus / f"{name}.ode")]).exit_code == code


@pytest.mark.parametrize(
    "name, code, equation",
    [
        ("example2", EXIT_OK, "y1 + y2 + t*y^(-2) - 3 = c"),
        ("linear", EXIT_OK, "y1 - t + t*y = c"),
        ("exact_product", EXIT_OK, "y*y1 = c"),
        ("exact_third", EXIT_OK, "y2 + t*y1 + y*exp(t) = c"),
        ("sine", EXIT_NO_FACTOR, None),
    ],
)
def test_reduce(corpus, name, code, equation):
    doc = run(["reduce", str(corpus / f"{name}.ode")])
    assert doc.exit_code == code
    if equation is not None:
        assert doc.first_integral["equation"] == equation


def test_reduce_verify_example2(corpus):
    doc = run(["reduce", str(corpus / "example2.ode"), "--verify"])
    assert doc.exit_code == EXIT_OK
    assert doc.factor["mu"] == "y^(-3)" and doc.factor["path"] == "jet:1"
    assert len(doc.verification) == 5
    assert all(r["passed"] and r["normalized_drift"] <= 1e-6 for r in doc.verification)


def test_zero_base_is_retried(corpus):
    doc = run(["reduce", str(corpus / "example2.ode"), "--base", "t0=0, y0=0, y1=0, y2=0"])
    assert doc.exit_code == EXIT_OK
    assert len(doc.diagnostics) == 1 and "is singular" in doc.diagnostics[0]
    assert "retrying" in doc.diagnostics[0]
    assert doc.first_integral["base_point"]["y"] != "0"


def test_find_mu_xi_choices(corpus):
    ex2 = str(corpus / "example2.ode")
    assert run(["find-mu", ex2, "--xi", "y"]).factor["mu"] == "y^(-3)"
    assert run(["find-mu", ex2, "--xi", "ansatz"]).factor["exponents"] == ["0", "-3", "0", "0"]
    # g = -3/(2s) for xi = y^2, so mu = |y|^(-3), a constant multiple of y^(-3) on each side of y = 0
    sq = run(["find-mu", ex2, "--xi", "expr:y^2"]).factor
    assert sq["mu"] == "|y^2|^(-3/2)" and sq["certified"]
    doc = run(["find-mu", ex2, "--xi", "t"])
    assert doc.exit_code == EXIT_NO_FACTOR and doc.error["type"] == "CrossConditionsFail"
    assert run(["find-mu", str(corpus / "linear.ode"), "--xi", "t"]).factor["mu"] == "t^(-1)"


def test_find_mu_on_exact_input(corpus):
    doc = run(["find-mu", str(corpus / "exact_product.ode")])
    assert doc.exit_code == EXIT_OK and doc.factor["mu"] == "1" and doc.factor["path"] == "exact"


def test_verify_command(corpus):
    bad = run(["verify", str(corpus / "sine.ode"), "--psi", "y"])
    assert bad.exit_code == EXIT_VERIFY_FAILED
    assert max(r["normalized_drift"] for r in bad.verification) > 0.1
    good = run(["verify", str(corpus / "sine.ode"), "--psi", "y^2 + y1^2"])
    assert good.exit_code == EXIT_OK
    assert run(["verify", str(corpus / "sine.ode"), "--psi", "y2"]).exit_code == EXIT_ERROR


def test_nonlinear_is_rejected(capsys, corpus):
    code, out = out_of(capsys, ["reduce", str(corpus / "bad_nonlinear.ode")])
    assert code == EXIT_ERROR and "NotQuasiLinear" in out


def test_missing_file(tmp_path):
    doc = run(["check", str(tmp_path / "nope.ode")])
    assert doc.exit_code == EXIT_ERROR


def test_json_document(capsys, corpus):
    code, out = out_of(capsys, ["--json", "reduce", str(corpus / "example2.ode"), "--verify"])
    doc = json.loads(out)
    assert code == doc["exit_code"] == 0
    assert {"command", "seed", "input", "exactness", "factor", "first_integral", "verification", "diagnostics"} <= set(doc)
    assert doc["exactness"]["violated"] == 3
    assert [c["pair"] for c in doc["exactness"]["conditions"] if not c["holds"]] == [[1, 0], [2, 1], [3, 1]]


def test_global_flags_after_subcommand(capsys, corpus):
    _, before = out_of(capsys, ["--json", "--seed", "3", "check", str(corpus / "example2.ode")])
    _, after = out_of(capsys, ["check", str(corpus / "example2.ode"), "--json", "--seed", "3"])
    assert before == after and json.loads(after)["seed"] == 3


def test_output_is_deterministic(capsys, corpus):
    argv = ["reduce", str(corpus / "example2.ode"), "--verify", "--seed", "11"]
    _, a = out_of(capsys, argv)
    _, b = out_of(capsys, argv)
    assert a == b
    _, c = out_of(capsys, argv[:-1] + ["12"])
    assert c != a


def test_box_and_probes(corpus):
    doc = run(["--box=0.5:2", "--probes", "8", "check", str(corpus / "example2.ode")])
    assert doc.exit_code == EXIT_NOT_EXACT
    assert run(["--box", "2", "check", str(corpus / "example2.ode")]).exit_code == EXIT_ERROR
    assert run(["--probes", "0", "check", str(corpus / "example2.ode")]).exit_code == EXIT_ERROR


def test_dump_csv(tmp_path, corpus):
    path = tmp_path / "traj.csv"
    doc = run(["reduce", str(corpus / "example2.ode"), "--verify", "--dump-csv", str(path)])
    rows = path.read_text().splitlines()
    assert rows[0] == "t,y,y1,y2,psi" and len(rows) == 502
    psi = [float(r.split(",")[-1]) for r in rows[1:]]
    assert max(psi) - min(psi) < 1e-6
    assert any("traj.csv" in d for d in doc.diagnostics)


def test_module_entry_point(corpus):
    proc = subprocess.run(
        [sys.executable, "-m", "jetfactor", "check", str(corpus / "exact_product.ode")], capture_output=True, text=True
    )
    assert proc.returncode == 0 and "exactness: exact" in proc.stdout
