import csv
import io
import json
import math

import numpy as np
import pytest

from sepprofiles import cli, riffle


def run_cli(capsys, *argv):
    status = cli.main(list(argv))
    captured = capsys.readouterr()
    return status, captured.out, captured.err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_rt_exact_six_zero_diff_rows(capsys):
    status, out, _ = run_cli(capsys, "rt-exact", "--n", "4", "--m", "1..6")
    rows = rows_of(out)
    assert status == 0 and len(rows) == 6
    assert all(r["abs_diff"] == "0" and r["check"] == "pass" for r in rows)
    assert rows[2]["exact"] == "7/16"


def test_constants_rows(capsys):
    status, out, _ = run_cli(capsys, "constants")
    rows = {r["quantity"]: r for r in rows_of(out)}
    assert status == 0
    assert abs(float(rows["a"]["value"]) - 4.65979) < 1e-4
    assert abs(float(rows["b"]["value"]) - 1.08247) < 1e-4


def test_hypercube_million(capsys):
    status, out, _ = run_cli(capsys, "hypercube", "--n", "1000000", "--c", "0")
    (row,) = rows_of(out)
    assert status == 0 and abs(float(row["value"]) - 0.63212) < 1e-5


def test_csv_is_rfc4180_with_twelve_digits(capsys):
    _, out, _ = run_cli(capsys, "rt-exact", "--n", "4", "--m", "3")
    assert out.endswith("\r\n") and "\r\n" in out.splitlines(keepends=True)[0]
    assert '"(2,2)"' in out
    _, out, _ = run_cli(capsys, "hypercube", "--n", "50", "--c", "0.3")
    value = rows_of(out)[0]["value"]
    assert value == f"{float(value):.12g}" and len(value.replace("0.", "").lstrip("0")) <= 12


def test_json_mirrors_csv_columns(capsys):
    _, out_csv, _ = run_cli(capsys, "zmn", "--m", "3", "--n", "1000", "--b", "0.5", "--c", "-1,0,1")
    _, out_json, _ = run_cli(capsys, "zmn", "--m", "3", "--n", "1000", "--b", "0.5", "--c", "-1,0,1",
                             "--format", "json")
    doc = json.loads(out_json)
    reader = csv.reader(io.StringIO(out_csv))
    header = next(reader)
    assert doc["columns"] == header
    body = list(reader)
    assert len(doc["rows"]) == len(body) == 6
    for jrow, crow in zip(doc["rows"], body):
        for col, cell in zip(header, crow):
            value = jrow[col]
            assert (cell == "" and value is None) or cell == cli.format_cell(value)


def test_c_grid_from_range(capsys):
    _, out, _ = run_cli(capsys, "bl", "--n", "100", "--c-min", "-2", "--c-max", "2", "--c-step", "0.5")
    rows = rows_of(out)
    assert [float(r["c"]) for r in rows] == pytest.approx(list(np.arange(-2, 2.01, 0.5)))
    assert all(r["dominated"] == "true" for r in rows)


def test_negative_c_list(capsys):
    status, out, _ = run_cli(capsys, "rt-profile", "--n", "500", "--c", "-1,0,2")
    assert status == 0 and [r["c"] for r in rows_of(out)] == ["-1", "0", "2"]


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# transpositions\nn = 4\nm = 1..3\nformat = json\n")
    _, out, _ = run_cli(capsys, "rt-exact", "--config", str(cfg))
    assert len(json.loads(out)["rows"]) == 3
    _, out, _ = run_cli(capsys, "rt-exact", "--config", str(cfg), "--format", "csv", "--m", "2")
    assert len(rows_of(out)) == 1


def test_output_path(tmp_path, capsys):
    path = tmp_path / "table.csv"
    status, out, _ = run_cli(capsys, "constants", "--output", str(path))
    assert status == 0 and out == ""
    assert path.read_bytes().startswith(b"quantity,value")


def test_usage_errors_exit_two(capsys, tmp_path):
    assert run_cli(capsys, "no-such-command")[0] == 2
    assert run_cli(capsys, "rt-exact")[0] == 2
    assert run_cli(capsys, "rt-exact", "--n", "9")[0] == 2
    assert run_cli(capsys, "riffle-mc", "--n", "10", "--trials", "0")[0] == 2
    assert run_cli(capsys, "rt-exact", "--config", str(tmp_path / "missing.cfg"))[0] == 2
    assert run_cli(capsys, "riffle-exact", "--n", "4", "--law", "bogus")[0] == 2


def test_help_exits_zero(capsys):
    assert run_cli(capsys, "--help")[0] == 0


def test_tolerance_failure_exits_one(capsys):
    status, out, _ = run_cli(capsys, "hypercube", "--n", "100", "--c", "0", "--tol", "1e-12")
    assert status == 1 and rows_of(out)[0]["check"] == "FAIL"


def test_strict_turns_warnings_into_numeric_failure(capsys, caplog):
    # c = -3.7 gives m = 0 at n = 40, where the alternating sum cancels to 0.
    args = ("rt-profile", "--n", "40", "--c", "-3.7")
    status, _, _ = run_cli(capsys, *args)
    assert status == 0 and "badly conditioned" in caplog.text
    assert run_cli(capsys, *args, "--strict")[0] == 3


def test_riffle_exact_against_brute_force(capsys):
    status, out, _ = run_cli(capsys, "riffle-exact", "--n", "4", "--law", "weights:1,2,0,3", "--t", "0..6")
    rows = rows_of(out)
    assert status == 0 and len(rows) == 7
    assert all(r["check"] == "pass" for r in rows)


def test_riffle_mc_matches_library_and_writes_times(tmp_path, capsys):
    path = tmp_path / "t.bin"
    status, out, _ = run_cli(capsys, "riffle-mc", "--n", "40", "--law", "delta:20", "--c", "-1,0,1",
                             "--trials", "300", "--seed", "4", "--times-out", str(path))
    rows = rows_of(out)
    assert status == 0
    law = riffle.PileSizeLaw.delta(40, 20, "float")
    times = [riffle.dense_time(40, c, law=law) for c in (-1, 0, 1)]
    curve = riffle.simulate_sst_curve(law, sorted(set(times)), 300, seed=4, return_collision_times=True)
    by_t = {p.t: p.estimate for p in curve.points()}
    assert [float(r["value"]) for r in rows] == pytest.approx([by_t[t] for t in times], abs=1e-12)
    assert np.array_equal(riffle.read_collision_times(path), curve.collision_times)


def test_ktop_sparse_columns(capsys):
    status, out, _ = run_cli(capsys, "ktop", "--n", "60", "--k", "1", "--c", "0", "--trials", "200")
    (row,) = rows_of(out)
    assert status == 0
    assert float(row["oracle"]) == pytest.approx(1 - 2 / math.e, abs=1e-12)
    assert int(row["t"]) == math.floor(60 * math.log(60))


@pytest.mark.parametrize("argv", [
    ("riffle-mc", "--n", "30", "--c", "-1,0,1", "--trials", "200"),
    ("ktop", "--n", "50", "--k", "25", "--regime", "dense", "--c", "0,1", "--trials", "200"),
    ("rt-profile", "--n", "200", "--c", "0,1", "--touched", "--trials", "300"),
])
def test_monte_carlo_output_independent_of_workers(capsys, argv):
    _, one, _ = run_cli(capsys, *argv, "--workers", "1")
    _, again, _ = run_cli(capsys, *argv, "--workers", "1")
    _, three, _ = run_cli(capsys, *argv, "--workers", "3")
    assert one == again == three


def test_bounds_families(capsys):
    for family in ("biased", "central", "spectral", "zmn", "halfsplit"):
        status, out, _ = run_cli(capsys, "bounds", "--family", family, "--n-range", "10..14:2")
        rows = rows_of(out)
        assert status == 0 and len(rows) == 3
        assert all(float(r["value"]) >= 0 for r in rows)
    assert run_cli(capsys, "bounds", "--family", "nope", "--n", "10")[0] == 2


def test_selftest_passes(capsys):
    status, out, _ = run_cli(capsys, "selftest")
    assert status == 0 and "FAIL" not in out


def test_parse_helpers():
    assert cli.parse_int_range("1..4") == [1, 2, 3, 4]
    assert cli.parse_int_range("10..30:10") == [10, 20, 30]
    assert cli.parse_int_range("2,5") == [2, 5]
    assert cli.c_grid(None, -1.0, 1.0, 1.0) == [-1.0, 0.0, 1.0]
    with pytest.raises(cli.ValidationError):
        cli.c_grid(None, -1.0, None, None)
