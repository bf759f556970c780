import csv
import math
from pathlib import Path

import pytest

from rootsmith import secular
from rootsmith.cli import main

from conftest import GOLDEN_LOW

FIXTURES = Path(__file__).parent / "fixtures"


def fixture(name):
    return str(FIXTURES / name)


def parse_root_lines(out):
    rows = []
    for line in out.splitlines():
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        rows.append(parts)
    return rows


def test_solve_secular_with_verify(capsys):
    code = main(["solve", "secular", fixture("secular_n2.json"), "--method", "bns", "--verify"])
    out = capsys.readouterr().out
    assert code == 0
    rows = parse_root_lines(out)
    assert len(rows) == 1
    index, value, iters, status, abs_err, rel_err = rows[0]
    assert index == "1"
    assert status == "Converged"
    assert abs(float(value) - GOLDEN_LOW) <= 1e-12
    assert float(rel_err) <= 1e-12


def test_cli_root_equals_library_bit_for_bit(capsys):
    code = main(["solve", "secular", fixture("secular_n3.json"), "--method", "transformed"])
    out = capsys.readouterr().out
    assert code == 0
    rows = parse_root_lines(out)
    p = secular.SecularProblem(b=(1.0, 1.0, 1.0), d=(0.0, 1.0, 2.0))
    for row in rows:
        i = int(row[0])
        trace = secular.solve_root(p, i, secular.Method.TRANSFORMED)
        assert float(row[1]) == trace.root


def test_solve_trinomial(capsys):
    code = main(["solve", "trinomial", fixture("trinomial_331.json")])
    out = capsys.readouterr().out
    assert code == 0
    rows = parse_root_lines(out)
    assert len(rows) == 2
    assert float(rows[0][1]) == pytest.approx(0.347296, abs=1e-6)
    assert float(rows[1][1]) == pytest.approx(1.532089, abs=1e-6)


def test_solve_knapsack_with_verify(capsys):
    code = main(["solve", "knapsack", fixture("knapsack_n2.json"), "--verify"])
    out = capsys.readouterr().out
    assert code == 0
    rows = parse_root_lines(out)
    assert len(rows) == 1
    assert rows[0][3] == "Converged"
    assert float(rows[0][5]) <= 1e-10


def test_solve_pellet_kind(capsys):
    code = main(["solve", "pellet", fixture("pellet_cubic.json"), "--verify"])
    out = capsys.readouterr().out
    assert code == 0
    rows = parse_root_lines(out)
    assert len(rows) == 2
    assert float(rows[0][1]) == pytest.approx(2 * math.cos(math.radians(80)), rel=1e-9)
    assert float(rows[1][1]) == pytest.approx(2 * math.cos(math.radians(40)), rel=1e-9)
    assert float(rows[0][5]) <= 1e-10


def test_malformed_instance_names_field(capsys):
    code = main(["solve", "secular", fixture("bad_secular.json")])
    err = capsys.readouterr().err
    assert code == 2
    assert "b[1] must be positive" in err


def test_missing_file(capsys):
    code = main(["solve", "secular", str(FIXTURES / "nope.json")])
    assert code == 2


def test_kind_mismatch(capsys):
    code = main(["solve", "knapsack", fixture("secular_n2.json")])
    err = capsys.readouterr().err
    assert code == 2
    assert "does not match" in err


def test_root_index_out_of_range(capsys):
    code = main(["solve", "secular", fixture("secular_n3.json"), "--root", "5"])
    assert code == 2


def test_non_convergence_exit_code(capsys):
    code = main(["solve", "secular", fixture("secular_n3.json"), "--max-iters", "1", "--tol", "1e-300"])
    assert code == 3


def test_trace_csv_monotone(tmp_path, capsys):
    trace_base = tmp_path / "trace.csv"
    code = main(
        ["solve", "secular", fixture("secular_n3.json"), "--method", "bns", "--trace", str(trace_base)]
    )
    assert code == 0
    for i in (1, 2):
        path = tmp_path / f"trace-root{i}.csv"
        assert path.exists()
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["iter", "x", "f_x"]
        xs = [float(r[1]) for r in rows[1:]]
        assert all(xs[k] < xs[k + 1] for k in range(len(xs) - 1))


def test_trace_csv_single_root_path(tmp_path, capsys):
    path = tmp_path / "one.csv"
    code = main(
        ["solve", "secular", fixture("secular_n3.json"), "--root", "1", "--trace", str(path)]
    )
    assert code == 0
    assert path.exists()


def test_jobs_match_serial(capsys):
    code = main(["solve", "secular", fixture("secular_n3.json")])
    serial = capsys.readouterr().out
    assert code == 0
    code = main(["solve", "secular", fixture("secular_n3.json"), "--jobs", "2"])
    parallel = capsys.readouterr().out
    assert code == 0
    assert serial == parallel


def test_samples_secular_domination(capsys):
    code = main(
        [
            "samples",
            "secular",
            fixture("secular_n2.json"),
            "--range",
            "0.01:0.99",
            "--samples",
            "98",
            "--fit-point",
            "0.25",
        ]
    )
    out = capsys.readouterr().out
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["x", "f_x", "g_x", "n_x"]
    assert len(rows) - 1 == 98
    for row in rows[1:]:
        f_x, g_x = float(row[1]), float(row[2])
        assert g_x >= f_x - 1e-10 * (1 + abs(f_x) + abs(g_x))


def test_samples_trinomial_sign_pattern(capsys):
    code = main(
        ["samples", "trinomial", fixture("trinomial_331.json"), "--range", "0.0:2.0", "--samples", "100"]
    )
    out = capsys.readouterr().out
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    vals = [float(r[1]) for r in rows[1:]]
    signs = [v > 0 for v in vals]
    changes = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
    assert changes == 2
    assert signs[0] and not signs[len(signs) // 2] and signs[-1]


def test_samples_skips_poles(capsys):
    code = main(
        ["samples", "secular", fixture("secular_n2.json"), "--range", "0.0:1.0", "--samples", "11"]
    )
    out = capsys.readouterr().out
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    xs = [float(r[0]) for r in rows[1:]]
    assert 0.0 not in xs and 1.0 not in xs
    assert len(xs) == 9


def test_samples_invalid_range(capsys):
    code = main(
        ["samples", "secular", fixture("secular_n2.json"), "--range", "0.9:0.1"]
    )
    assert code == 2
    code = main(
        ["samples", "secular", fixture("secular_n2.json"), "--range", "0.1:0.9", "--samples", "1"]
    )
    assert code == 2


def test_samples_to_file(tmp_path, capsys):
    out_path = tmp_path / "samples.csv"
    code = main(
        [
            "samples",
            "knapsack",
            fixture("knapsack_n2.json"),
            "--range",
            "0.01:0.49",
            "--samples",
            "10",
            "--out",
            str(out_path),
        ]
    )
    assert code == 0
    with open(out_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "f_x"]
    vals = [float(r[1]) for r in rows[1:]]
    assert all(vals[k] > vals[k + 1] for k in range(len(vals) - 1))


def test_compare_secular(capsys):
    code = main(["compare", "secular", fixture("secular_n3.json")])
    out = capsys.readouterr().out
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# root")
    assert len(lines) == 3
    for line in lines[1:]:
        cells = line.split()
        assert len(cells) == 4
        assert all(int(c) >= 0 for c in cells[1:])


def test_compare_trinomial(capsys):
    code = main(["compare", "trinomial", fixture("trinomial_331.json")])
    out = capsys.readouterr().out
    assert code == 0
    assert "lower" in out and "upper" in out


def test_method_flag_on_wrong_kind(capsys):
    code = main(["solve", "knapsack", fixture("knapsack_n2.json"), "--method", "bns"])
    assert code == 2


def test_unknown_subcommand():
    assert main(["frobnicate"]) == 2
