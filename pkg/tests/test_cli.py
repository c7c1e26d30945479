import json

import pytest

from lyness.cli import UsageError, dumps, main, parse


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_examples():
    cmd = parse(["simulate", "--cycle", "2,4,7,0.001", "--start", "14.8,8.25",
                 "--steps", "1000000"])
    assert cmd.verb == "simulate" and cmd.steps == 1_000_000 and cmd.start == (14.8, 8.25)
    assert parse(["invariants", "--cycle", "1,2,3,4,5,6"]).cycle.k == 6
    for bad in (["simulate", "--cycle", "2,-1", "--start", "1,1"],
                ["simulate", "--cycle", "1"], ["frobnicate"], ["simulate", "--bogus"],
                ["intervals", "--cycle", "1", "--start", "1,1", "--gap-factor", "-3"],
                ["scan", "--cycle", "1,2", "--axis", "3:1:2:3", "--diagnostic", "kernel-dim"],
                ["verify", "--only", "99"]):
        with pytest.raises(UsageError):
            parse(bad)


def test_usage_error_exit_code(capsys):
    code, _, err = run(["simulate", "--cycle", "2,-1", "--start", "1,1"], capsys)
    assert code == 1 and "usage error" in err


def test_environment_precision(monkeypatch):
    monkeypatch.setenv("LYNESS_PRECISION", "extended")
    assert parse(["simulate", "--cycle", "1", "--start", "1,1"]).mode == "extended"
    monkeypatch.setenv("LYNESS_PRECISION", "quad")
    with pytest.raises(UsageError):
        parse(["simulate", "--cycle", "1", "--start", "1,1"])


def test_invariants_output(capsys):
    code, out, _ = run(["invariants", "--cycle", "1,2,3,4,5,6"], capsys)
    d = json.loads(out)
    assert code == 0 and d["kernel_dimension"] == 1
    ph = d["forms"][0]["phases"][0]
    ratio = [ph[L] / ph["A"] * 6 for L in "ABCDFHI"]
    assert ratio == pytest.approx([6, 13, 11, 2, 5, 3, 4], rel=1e-9)


def test_classify_output(capsys):
    code, out, _ = run(["classify", "--cycle", "2,6,3,0.5,0.16666666666666666"], capsys)
    d = json.loads(out)
    assert code == 0 and d["verdict"] == "nonpersistent_by_theorem"
    assert d["phi"] == pytest.approx([2, 6, 3, 0.5, 1 / 6])


def test_numeric_failure_exit_code(capsys):
    code, _, err = run(["simulate", "--cycle", "0.5", "--start", "1e-300,1e-300"], capsys)
    d = json.loads(err)
    assert code == 2 and d["error"] == "RangeError" and d["module"] == "dynamics"


def test_simulate_is_byte_deterministic(tmp_path, capsys):
    files = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        assert main(["simulate", "--cycle", "2,4,7,0.001", "--start", "14.8,8.25", "--mode", "log",
                     "--steps", "2000", "--out", str(path)]) == 0
        files.append(path.read_bytes())
    report = json.loads(capsys.readouterr().out.splitlines()[-1])
    assert files[0] == files[1]
    assert report["version"] and "wall_time" in report
    assert files[0].splitlines()[0] == b"n,x,y"


def test_scan_order_independent_of_jobs(tmp_path):
    outs = []
    for jobs in ("1", "3"):
        path = tmp_path / f"scan{jobs}.csv"
        assert main(["scan", "--cycle", "1,2,3,4,5,6", "--axis", "1:0.5:2:3", "--axis", "6:1:4:2",
                     "--diagnostic", "fixed-point-count", "--jobs", jobs, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    lines = outs[0].decode().splitlines()
    assert lines[0] == "a1,a6,fixed-point-count" and len(lines) == 7


@pytest.mark.parametrize("argv,key,value", [
    (["periods", "--cycle", "1/4,1/2,2,4"], "recurrence_period", 20),
    (["rotation", "--cycle", "1", "--start", "1,1"], "rotation_number", pytest.approx(0.8)),
    (["fixed-points", "--cycle", "1,1,1,1"], "points", None),
    (["intervals", "--cycle", "1", "--start", "1,1", "--mode", "standard", "--steps", "20000"],
     "count", 3),
])
def test_verbs(argv, key, value, capsys):
    code, out, _ = run(argv, capsys)
    d = json.loads(out)
    assert code == 0
    if value is not None:
        assert d[key] == value
    else:
        assert len(d[key]) == 1


def test_verify_subset(capsys):
    code, out, err = run(["verify", "--only", "1,6,8"], capsys)
    assert code == 0 and json.loads(out)["passed"] is True
    assert err.count("[PASS]") == 3


def test_dumps_float_format():
    assert dumps({"a": 0.1, "b": 1.0, "c": [1, None, True]}) == \
        '{"a": 0.10000000000000001, "b": 1.0, "c": [1, null, true]}'
    assert json.loads(dumps(float("nan"))) != json.loads(dumps(float("nan")))
