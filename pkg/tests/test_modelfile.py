import pytest

from defcalc.lie import sl2, symplectic_fixture, validate_geometric_model
from defcalc.modelfile import ModelSemanticError, ModelSyntaxError, from_geometric, from_lie, parse, serialize

GOOD = """# comment line
[lie_algebra]
basis e h f   # trailing comment
bracket e f = h
bracket h e = 2:e
bracket h f = -2:f
"""


def test_parse_and_completion():
    g = parse(GOOD).lie_model()
    e, h, f = range(3)
    assert g.bracket_basis(f, e) == {h: -1}
    assert g.bracket_basis(e, h) == {e: -2}


def test_crlf_and_tabs():
    text = GOOD.replace("\n", "\r\n").replace("basis e h f", "basis\te  h\tf")
    assert serialize(parse(text)) == serialize(parse(GOOD))


@pytest.mark.parametrize("text, line, col", [
    ("[lie_algebra]\nbasis a b\nbracket a b = 1/0:a\n", 3, 15),
    ("[lie_algebra]\nbasis a b\nbracket a b = 0.5:a\n", 3, 15),
    ("[lie_algebra]\nbasis a b\nfoo a b = a\n", 3, 1),
    ("[lie_algebra]\nbasis a b\nbracket a = a\n", 3, 11),
    ("[lie_algebra]\nbasis a b\nbracket a b a\n", 3, 1),
    ("[nope]\n", 1, 2),
    ("basis a\n", 1, 1),
    ("[lie_algebra]\nbasis a a\n", 2, 9),
    ("[lie_algebra]\nbasis a b\n[lie_algebra]\n", 3, 2),
    ("[dgla]\nelement x one\n", 2, 11),
    ("[lie_algebra]\nbasis a b\nbracket a b = a a\n", 3, 17),
    ("[artin_algebra]\ntruncated_polynomial x 0\n", 2, 24),
])
def test_syntax_errors_carry_position(text, line, col):
    with pytest.raises(ModelSyntaxError) as exc:
        parse(text)
    assert (exc.value.line, exc.value.col) == (line, col)


@pytest.mark.parametrize("text, label", [
    ("[lie_algebra]\nbasis a b\nbracket a q = a\n", "q"),
    ("[representation]\nbasis v\n", "lie_algebra"),
    ("[dgla]\nelement x 1\n", "dg_algebra"),
    ("[dgla]\nelement x 1\n[dg_algebra]\nelement 1 0\n", "dg_algebra"),
    ("[lie_algebra]\nbasis a\n[dgla]\nelement x 1\n[dg_algebra]\nelement 1 0\nunit 1\n", "lie_algebra"),
    ("[artin_algebra]\nbasis 1 x\n", "artin_algebra"),
    ("[dgla]\nelement x 1\n[dg_algebra]\nelement 1 0\nunit 1\n[pairing]\npair x x = w\n", "w"),
])
def test_semantic_errors_name_the_label(text, label):
    with pytest.raises(ModelSemanticError) as exc:
        parse(text)
    assert exc.value.label == label


def test_serialize_is_canonical_and_idempotent(fixtures_dir):
    for path in sorted(fixtures_dir.glob("*.model")):
        mf = parse(path.read_bytes())
        once = serialize(mf)
        assert serialize(parse(once)) == once


def test_geometric_round_trip_preserves_the_model():
    gm = symplectic_fixture()
    back = from_geometric(gm).geometric_model(gm.name)
    assert back == gm
    assert validate_geometric_model(back).ok


def test_lie_round_trip():
    g, rep = sl2()
    mf = from_lie(g, rep)
    assert mf.lie_model().brackets == g.brackets
    assert mf.representation().matrices == rep.matrices


def test_digest_is_of_the_raw_bytes():
    import hashlib
    assert parse(GOOD).digest == hashlib.sha256(GOOD.encode()).hexdigest()


def test_truncated_and_free(fixtures_dir):
    mf = parse((fixtures_dir / "truncated_xy3.model").read_bytes())
    S = mf.artin()
    assert S.dim == 6 and mf.polynomial_presentation() == (("x", "y"), 3)
    assert len(mf.artin_module_actions()) == 6
