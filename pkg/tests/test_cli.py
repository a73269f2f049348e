import json

import pytest

from ptcap.cli import main
from ptcap.io import iter_csv_counts


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_three_point(capsys):
    code, out, _ = run(capsys, "solve", "--config", "three-point", "--points", "1+1i,2-0.5i")
    assert code == 0
    data = json.loads(out)
    assert data["config"] == "three_point"
    assert data["residual_norm"] <= 1e-12


def test_solve_segment(capsys):
    code, out, _ = run(capsys, "solve", "--config", "outer-two", "--points", "-1,1")
    assert code == 0
    assert json.loads(out)["capacity"] == pytest.approx(0.5, abs=1e-10)


def test_missing_points_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["solve", "--config", "three-point"])
    assert info.value.code == 1


@pytest.mark.parametrize("argv", [
    ["solve", "--config", "nonsense", "--points", "1"],
    ["solve", "--config", "three-point", "--points", "1+1i,abc"],
    ["solve", "--config", "three-point", "--points", "1+1i"],
    ["constants", "--which", "lifetime"],
    ["trace", "--config", "three-point"],
])
def test_usage_errors(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 1


def test_infeasible_geometry_exit_code(capsys):
    code, _, err = run(capsys, "constants", "--which", "bloch", "--x", "1.0", "--R", "5")
    assert code == 3
    assert "geometry" in err.lower() or "x = 1.0" in err


def test_constants_with_given_radius(capsys, tmp_path):
    out = tmp_path / "c.json"
    code, _, _ = run(capsys, "constants", "--which", "bloch", "--x", "2.1383799965243",
                     "--R", "5.1195152501", "--out", str(out))
    assert code == 0
    data = json.loads(out.read_text())
    assert data["value"] == pytest.approx(0.656319277272, abs=1e-6)


def test_solve_then_trace(capsys, tmp_path):
    sol = tmp_path / "sol.json"
    assert main(["solve", "--config", "three-point", "--points", "1+1i,2-0.5i", "--out", str(sol)]) == 0
    capsys.readouterr()
    code, out, err = run(capsys, "trace", "--solution", str(sol), "--format", "csv")
    assert code == 0
    counts = [int(line.split(":")[1].split()[0]) for line in err.splitlines() if line.startswith("arc")]
    assert counts and sum(counts) == len(out.splitlines()) - 1
    assert iter_csv_counts(out) == counts
    code, out, _ = run(capsys, "trace", "--solution", str(sol), "--format", "svg")
    assert code == 0 and out.count("<path") == len(counts)


def test_trace_unreadable_solution(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, _ = run(capsys, "trace", "--solution", str(bad))
    assert code == 1


def test_validate_partition(capsys, tmp_path):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"pairs": [[[0, 0.5], [0.5, 1.0]]], "marked_pair": 0}))
    code, out, _ = run(capsys, "validate-partition", str(good))
    assert code == 0 and out.strip() == "valid"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"pairs": [[[0, 0.25], [0.5, 0.75]], [[0.25, 0.5], [0.75, 1.0]]],
                               "marked_pair": 0}))
    code, out, _ = run(capsys, "validate-partition", str(bad))
    assert code == 2 and out.startswith("invalid: crossing")


def test_unwritable_output(capsys):
    code, _, _ = run(capsys, "solve", "--config", "outer-two", "--points", "-1,1",
                     "--out", "/nonexistent/dir/x.json")
    assert code == 1


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
