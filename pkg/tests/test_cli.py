import json

import pytest

from fgc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_chern_check_passes(capsys):
    code, out, _ = run(capsys, "tate", "chern-check", "--roots", "4", "--order", "8")
    assert code == 0
    assert "passed: True" in out


def test_broken_law_exit_code(capsys):
    code, out, _ = run(capsys, "fgl", "verify", "--law", "broken-example", "--order", "4", "--json")
    assert code == 1
    report = json.loads(out)
    assert report["first_failure"]["mono"] == [2, 0]
    assert report["unital"] is False


def test_window_error_exit_code(capsys):
    code, out, err = run(capsys, "tate", "tch", "--roots", "2", "--window", "0:4")
    assert code == 3
    assert out == ""
    assert err.count("\n") == 1 and err.startswith("fgc: error: WindowError:")


def test_usage_errors(capsys):
    for argv in (["fgl"], ["fgl", "frobnicate"], ["tate", "tch", "--window", "1:2"],
                 ["fgl", "show", "--law", "nonsense"], ["cn", "verify", "--n", "1"]):
        code, _, err = run(capsys, *argv)
        assert code == 2, argv
        assert err.count("\n") == 1


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "cn", "delta", "--series-json", str(tmp_path / "nope.json"))
    assert code == 2 and "io" in err


def test_bad_json_file(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, _, err = run(capsys, "cn", "delta", "--series-json", str(p))
    assert code == 2 and "ParseError" in err


def test_fgl_show_json(capsys):
    code, out, _ = run(capsys, "fgl", "show", "--law", "multiplicative", "--order", "3", "--json")
    obj = json.loads(out)
    assert code == 0
    assert obj["ring"] == {"base": "Q", "gens": [["u", 2]]}
    assert [t["coeff"] for t in obj["terms"]] == ["1", "1", "u"]


def test_tate_tch_json_window(capsys):
    code, out, _ = run(capsys, "tate", "tch", "--law", "multiplicative", "--roots", "3", "--order", "6", "--json")
    obj = json.loads(out)
    assert code == 0
    assert obj["tate"]["low"] == -3
    assert obj["terms"][0] == {"t": -3, "mono": [1, 1, 1], "coeff": "1"}


def test_beta(capsys):
    code, out, _ = run(capsys, "tate", "beta", "--law", "universal_rational", "--gens", "4")
    assert code == 0
    assert out.startswith("t^-1 - 2*m1 + (4*m1^2 - 3*m2)*t")
    assert "unit: True" in out


def test_genus(capsys):
    code, out, _ = run(capsys, "class", "genus", "--law", "multiplicative", "--series", "todd", "--cpn", "6")
    assert (code, out) == (0, "1\n")


def test_cn_pipeline(capsys, tmp_path):
    g = tmp_path / "g.json"
    g.write_text(json.dumps({
        "ring": {"base": "Q", "gens": [["v", 2]]}, "vars": ["x"], "trunc": 12,
        "terms": [{"mono": [0], "coeff": "1"}, {"mono": [1], "coeff": "v"}],
    }))
    code, out, _ = run(capsys, "cn", "delta", "--series-json", str(g), "--law", "additive", "--json")
    assert code == 0
    s = tmp_path / "s.json"
    s.write_text(out)
    code, out, _ = run(capsys, "cn", "verify", "--n", "2", "--law", "additive", "--series-json", str(s),
                       "--order", "6", "--json")
    report = json.loads(out)
    assert code == 0
    assert {k: report[k] for k in ("symmetric", "normalized", "cocycle_to")} == {
        "symmetric": True, "normalized": True, "cocycle_to": 6}
    code, out, _ = run(capsys, "cn", "sharp", "--n", "2", "--law", "additive", "--series-json", str(s),
                       "--window", "-4:6", "--json")
    obj = json.loads(out)
    assert code == 0 and obj["report"]["passed"]
    assert obj["series"]["tate"] == {"low": 0, "high": 6}


def test_cn_verify_wrong_arity(capsys, tmp_path):
    g = tmp_path / "g.json"
    g.write_text(json.dumps({"ring": {"base": "Q", "gens": []}, "vars": ["x"], "trunc": 4,
                             "terms": [{"mono": [0], "coeff": "1"}]}))
    code, _, err = run(capsys, "cn", "verify", "--n", "2", "--series-json", str(g))
    assert code == 2 and "PreconditionError" in err


@pytest.mark.parametrize("argv", [
    ["fgl", "verify", "--law", "jacobi_quartic", "--order", "6", "--json"],
    ["class", "expand", "--series", "signature", "--rank", "3", "--order", "4", "--json"],
    ["tate", "invert-euler", "--roots", "2", "--order", "3", "--law", "multiplicative", "--json"],
    ["selftest", "--order", "2", "--json"],
])
def test_json_is_byte_identical(capsys, argv):
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second and first[0] == 0


def test_selftest_small_order(capsys):
    code, out, _ = run(capsys, "selftest", "--order", "2")
    assert code == 0 and out.rstrip().endswith("all passed")


def test_selftest_seed_does_not_change_verdicts(capsys):
    a = json.loads(run(capsys, "selftest", "--order", "3", "--json", "--seed", "1")[1])
    b = json.loads(run(capsys, "selftest", "--order", "3", "--json", "--seed", "7")[1])
    assert [c["passed"] for c in a["criteria"]] == [c["passed"] for c in b["criteria"]]
