import json

import pytest

from defcalc.cli import execute, main, render


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate_passes_on_every_fixture(fixtures_dir, capsys):
    for path in sorted(fixtures_dir.glob("*.model")):
        code, out, _ = run(capsys, "validate", "--model", str(path))
        assert code == 0, out
        assert out.rstrip().endswith("all checks passed")


@pytest.mark.parametrize("cmd, fixture, code", [
    ("cohomology", "sl2_symplectic", 0),
    ("deform", "abelian_dgla", 0),
    ("deform", "sl2_standard", 0),
    ("trace-form", "sl2_symplectic", 0),
    ("artin", "truncated_x3", 0),
    ("cartan", "truncated_xy3", 0),
    ("enveloping", "sl2_standard", 1),
])
def test_exit_codes(fixtures_dir, capsys, cmd, fixture, code):
    assert run(capsys, cmd, "--model", str(fixtures_dir / f"{fixture}.model"))[0] == code


def test_json_document_layout(fixtures_dir, tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "trace-form", "--model", str(fixtures_dir / "sl2_symplectic.model"),
                     "--eta", "2/3", "--json", str(out))
    doc = json.loads(out.read_text())
    assert list(doc) == ["command", "model", "input_digest", "parameters", "ok", "results", "checks"]
    assert doc["parameters"] == {"m": None, "eta": ["2/3"]}
    assert doc["ok"] is (code == 0)
    assert doc["results"]["nondegeneracy"]["nondegenerate"] is True
    assert all(set(c) == {"name", "status", "witness"} for c in doc["checks"])


def test_json_to_stdout_matches_file(fixtures_dir, tmp_path, capsys):
    path = str(fixtures_dir / "sl2_adjoint.model")
    out = tmp_path / "r.json"
    run(capsys, "cohomology", "--model", path, "--json", str(out))
    _, stdout, _ = run(capsys, "cohomology", "--model", path, "--json", "-")
    assert stdout == out.read_text()


def test_render_is_stable(fixtures_dir):
    a, _ = execute("deform", str(fixtures_dir / "abelian_dgla.model"), m=3)
    b, _ = execute("deform", str(fixtures_dir / "abelian_dgla.model"), m=3)
    assert render(a) == render(b)
    assert a["results"]["R_dim"] == 10


@pytest.mark.parametrize("argv, needle", [
    (["validate", "--model", "/nonexistent/x.model"], "cannot read"),
    (["frobnicate", "--model", "x"], "unknown command"),
    (["trace-form", "--eta", "1,q"], "--eta entry 2"),
    (["trace-form", "--eta", "1,1"], "H^2(A) has dimension 1"),
    (["enveloping"], "required section"),
    (["deform", "--m", "-1"], "--m must be nonnegative"),
    (["cartan"], "artin_algebra"),
])
def test_input_errors_exit_2(fixtures_dir, capsys, argv, needle):
    if "--model" not in argv:
        model = "truncated_x3" if argv[0] == "enveloping" else "sl2_symplectic"
        argv = argv + ["--model", str(fixtures_dir / f"{model}.model")]
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert needle in err


def test_parse_error_reports_position(tmp_path, capsys):
    bad = tmp_path / "bad.model"
    bad.write_text("[lie_algebra]\nbasis a b\nbracket a b = 1/0:a\n")
    code, _, err = run(capsys, "validate", "--model", str(bad))
    assert code == 2 and "line 3, col 15" in err


def test_failed_axioms_exit_1(tmp_path, capsys):
    bad = tmp_path / "notlie.model"
    bad.write_text("[lie_algebra]\nbasis e h f\nbracket e f = h\nbracket e h = e\nbracket h f = -2:f\n")
    code, out, _ = run(capsys, "validate", "--model", str(bad))
    assert code == 1 and "FAIL" in out


def test_missing_model_flag_is_usage_error(capsys):
    assert run(capsys, "validate")[0] == 2


def test_cartan_needs_a_polynomial_presentation(tmp_path, capsys):
    f = tmp_path / "dual_numbers.model"
    f.write_text("[artin_algebra]\nbasis 1 e\nunit 1\n")
    code, _, err = run(capsys, "cartan", "--model", str(f))
    assert code == 2 and "truncated_polynomial" in err
    assert run(capsys, "artin", "--model", str(f))[0] == 0
