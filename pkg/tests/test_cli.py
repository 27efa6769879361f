import io
import json

import pytest

from f1kit import cli


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def result(*argv):
    code, out, err = run(*argv)
    assert code == 0, err
    doc = json.loads(out)
    assert len(doc["input_digest"]) == 64
    return doc["result"]


WORKSPACE_TOML = """
[A]
kind = "monoid"
builtin = "F1[T]"

[M]
kind = "aset"
monoid = "A"
size = 3
actions = { T = [0, 2, 0] }

[N]
kind = "aset"
monoid = "A"
size = 2
actions = { T = [0, 0] }

[q]
kind = "morphism"
source = "M"
target = "N"
map = [0, 1, 0]

[inc]
kind = "morphism"
source = "K"
target = "M"
map = [0, 2]

[K]
kind = "aset"
monoid = "A"
size = 2
actions = { T = [0, 0] }

[ses]
kind = "sequence"
i = "inc"
j = "q"
"""

WORKSPACE_JSON = {
    "X": {
        "kind": "scheme",
        "charts": ["F1[T1]", "F1[T2]"],
        "overlaps": [{"i": 0, "j": 1, "f_i": [1], "f_j": [1], "phi": [[-1]]}],
    },
    "L": {"kind": "sheaf", "scheme": "X", "chart_data": [{"free": 1}, {"free": 1}], "gluing": [{"i": 0, "j": 1, "psi": [[0, [2]]]}]},
    "Sky": {
        "kind": "sheaf",
        "scheme": "P1",
        "chart_data": [{"size": 1, "actions": {"T1": [0]}}, {"size": 2, "actions": {"T2": [0, 0]}}],
        "gluing": [{"i": 0, "j": 1, "psi": {"0": 0}}],
    },
    "fold": {"kind": "morphism", "source": "W", "target": "R", "map": [0, 1, 1]},
    "W": {"kind": "aset", "monoid": "F1", "size": 3},
    "R": {"kind": "aset", "monoid": "F1", "size": 2},
}


@pytest.fixture
def toml_ws(tmp_path):
    p = tmp_path / "ws.toml"
    p.write_text(WORKSPACE_TOML)
    return str(p)


@pytest.fixture
def json_ws(tmp_path):
    p = tmp_path / "ws.json"
    p.write_text(json.dumps(WORKSPACE_JSON))
    return str(p)


def test_spec_of_affine_line():
    res = result("spec", "F1T")
    assert len(res["points"]) == 2


def test_spec_of_projective_plane():
    assert len(result("spec", "P2")["points"]) == 7


def test_pic_of_projective_spaces():
    for name in ("P1", "Pn(3)"):
        assert result("pic", name)["describe"] == "Z"


def test_k0_scheme_group_ring():
    res = result("k0", "--scheme", "P1")
    assert res["ring"] == "Z[Pic X]"
    assert res["product_window"]["O(1)*O(-2)"] == "t^-1"


def test_k0_monoids():
    assert result("k0", "F1")["group"]["free_rank"] == 1
    res = result("k0", "--monoid", "F1e")
    assert res["group"]["free_rank"] == 2 and res["ring"] == "Z[x]/(x^2 - x)"


def test_g0_commands():
    res = result("g0", "P1", "--truncate", "2")
    assert res["certificate"]["ok"]
    res = result("g0", "F1[Z/2]")
    assert res["marks"] == [[2, 0], [1, 1]]


def test_qnerve_pointed_sets():
    res = result("qnerve", "--pointed-sets", "3")
    assert res["pi1_abelianization"] == ["Z"]
    assert res["grothendieck_group"] == "Z" and res["agree"]


def test_qnerve_free_with_nerve_export():
    res = result("qnerve", "--free", "F1[Z/2]", "--max-size", "2", "--nerve")
    assert res["pi1_abelianization"] == ["Z"]
    assert {"vertices", "edges", "triangles", "spanning_tree"} <= set(res["nerve"])


def test_zbase():
    assert result("zbase", "F1[T,T^-1]")["ring"] == "Z[T,T^-1]/(T*T^-1 - 1)"
    res = result("zbase", "P1")
    assert len(res["charts"]) == 2


def test_toml_workspace_checks(toml_ws):
    res = result("check", "q", "--input", toml_ws)
    assert res["normal"] and res["epi"] and res["admissible_epi"]
    res = result("check", "ses", "--input", toml_ws)
    assert res == {"exact": True, "admissible": True, "split": False}
    res = result("check", "M", "--input", toml_ws)
    assert res["projective"] is False


def test_json_workspace(json_ws):
    res = result("check", "L", "--input", json_ws)
    assert res["locally_free"]
    res = result("check", "Sky", "--input", json_ws)
    assert res["coherent"] and not res["locally_projective"]
    res = result("check", "fold", "--input", json_ws)
    assert not res["normal"] and res["witness"] == [1, 2] and not res["z_kernel_rank_agrees"]
    assert result("pic", "X", "--input", json_ws)["describe"] == "Z"


def test_text_format():
    code, out, _ = run("spec", "F1T", "--format", "text")
    assert code == 0 and "input digest" in out


def test_exit_codes(tmp_path):
    assert run("spec", "NoSuchThing")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run("spec", "F1", "--input", str(bad))
    assert code == 2 and "bad.json" in err
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"m": {"kind": "aset", "monoid": "F1[T]", "size": 2, "actions": {"T": [1, 0]}}}))
    assert run("check", "m", "--input", str(wrong))[0] == 3
    nokind = tmp_path / "nokind.toml"
    nokind.write_text("[x]\nsize = 1\n")
    code, _, err = run("spec", "F1", "--input", str(nokind))
    assert code == 2 and "nokind.toml:x" in err
    assert run("g0", "F1[T]", "--truncate", "1")[0] in (0, 3)
    assert run("k0", "F1[T1,T2]")[0] == 0


def test_unsupported_exit_code():
    assert run("check", "F1")[0] == 4


def test_output_is_deterministic(toml_ws):
    a = run("k0", "--scheme", "P1")[1]
    b = run("k0", "--scheme", "P1")[1]
    assert a == b
    c = run("check", "ses", "--input", toml_ws)[1]
    d = run("check", "ses", "--input", toml_ws)[1]
    assert c == d


def test_digest_depends_on_input(tmp_path, toml_ws):
    other = tmp_path / "other.toml"
    other.write_text(WORKSPACE_TOML + "\n# changed\n")
    a = json.loads(run("check", "q", "--input", toml_ws)[1])["input_digest"]
    b = json.loads(run("check", "q", "--input", str(other))[1])["input_digest"]
    assert a != b
