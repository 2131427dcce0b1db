import json

from kstab.cli import COMMANDS, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_slope_of_torus_fixture(capsys):
    code, out, _ = run(capsys, "slope", "--input", "fixture:torus-2-3")
    assert code == 0 and out["slope"] == 6
    assert out["engines"] == ["crossings", "gauss"]


def test_slope_of_belt(capsys):
    code, out, _ = run(capsys, "slope", "--input", "fixture:dumbbell-belt", "--epsilon", "0.02")
    assert code == 0 and out["slope"] == 0 and out["separating"] is True


def test_slope_of_chart_curve_file(capsys, tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"torus": [3, 2], "n": 160}))
    code, out, _ = run(capsys, "slope", "--input", str(f), "--surface", "fixture:torus")
    assert code == 0 and out["slope"] == 6


def test_malformed_json_exits_1(capsys):
    code, out, err = run(capsys, "slope", "--input", "{oops", "--surface", "fixture:torus")
    assert code == 1 and "JSON" in err


def test_missing_file_exits_1(capsys):
    code, _, err = run(capsys, "genus", "--surface", "/nonexistent/graph.json")
    assert code == 1


def test_unknown_command_exits_1(capsys):
    assert main(["teleport"]) == 1


def test_numerical_error_exits_2(capsys):
    code, _, err = run(capsys, "slope", "--input", "fixture:torus-2-3", "--epsilon", "3")
    assert code == 2 and "EpsilonError" in err


def test_common_stab(capsys):
    a, b = '{"genus": 1, "slope": 6}', '{"genus": 2, "slope": 6}'
    code, out, _ = run(capsys, "common-stab", "--input", a, "--input", b)
    assert code == 0 and out["record"]["genus"] == 4 and out["replay_identical"]
    code, out, _ = run(capsys, "common-stab", "--input", a, "--input", b, "--extra-stabs", "2")
    assert out["record"]["genus"] == 6


def test_common_stab_slope_mismatch_exits_3(capsys):
    code, _, err = run(capsys, "common-stab", "--input", '{"genus": 1, "slope": 6}',
                       "--input", '{"genus": 1, "slope": 7}')
    assert code == 3 and "SlopeMismatch" in err


def test_connect_sum(capsys):
    code, out, _ = run(capsys, "connect-sum", "--input", '{"genus": 2, "slope": -3}',
                       "--input", '{"genus": 1, "slope": 7}')
    assert (out["genus"], out["slope"]) == (3, 4)


def test_decompose(capsys):
    code, out, _ = run(capsys, "decompose", "--input", '{"genus": 2, "slope": 3}')
    assert code == 0
    assert out["complement"]["plus_genus"] == 3 and out["collar"]["slope"] == 3


def test_realize_slope_writes_obj(capsys, tmp_path):
    obj = tmp_path / "u.obj"
    code, out, _ = run(capsys, "realize-slope", "--input", "fixture:unknot",
                       "--target-slope", "4", "--out", str(obj))
    assert code == 0
    assert (out["record"]["genus"], out["record"]["slope"], out["twist_count"]) == (1, 4, 4)
    code, out, _ = run(capsys, "genus", "--surface", str(obj))
    assert out["genus"] == 1


def test_realize_slope_symbolic(capsys):
    code, out, _ = run(capsys, "realize-slope", "--input", '{"name": "4_1", "tunnel_number": 1}',
                       "--target-slope", "0")
    assert out["record"]["genus"] == 2 and out["twist_count"] == 0


def test_twist(capsys):
    code, out, _ = run(capsys, "twist", "--input", "fixture:torus-1-0", "--k", "-2")
    assert code == 0 and out["slope_after"] - out["slope_before"] == -2


def test_stabilize(capsys, tmp_path):
    code, out, _ = run(capsys, "stabilize", "--input", "fixture:torus-2-3", "--seed", "5",
                       "--out", str(tmp_path / "s.obj"))
    assert code == 0 and out["genus"] == 2 and out["slope"] == out["slope_before"] == 6
    assert (tmp_path / "s.obj").exists()


def test_genus_and_export(capsys, tmp_path):
    code, out, _ = run(capsys, "genus", "--surface", "fixture:unknot-tunnel")
    assert out["genus"] == 2 and out["embedded"]
    code, out, _ = run(capsys, "export-obj", "--surface", "fixture:dumbbell", "--out",
                       str(tmp_path / "d.obj"))
    assert code == 0 and out["genus"] == 2


def test_selftest_report(capsys):
    code, out, _ = run(capsys, "selftest", "--seed", "0")
    assert code == 0 and out["passed"]
    assert out["count"] >= 10 and len(out["results"]) == out["count"]
    assert main(["selftest", "--seed", "0"]) == 0
    second = json.loads(capsys.readouterr().out)
    assert [r["passed"] for r in second["results"]] == [r["passed"] for r in out["results"]]


def test_every_command_is_wired():
    assert len(COMMANDS) == 10
