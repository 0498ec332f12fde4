import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from coinsearch.cli import dispatch

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = dispatch(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "argv,golden",
    [
        (["run", "--m", "3", "--forged", "0,4,7"], "run_m3_0_4_7.json"),
        (["channel-simulate", "--l", "1", "--m1", "1", "--m2", "0", "--m3", "0"],
         "channel_l1_1_0_0.json"),
        (["analyze", "--m-min", "2", "--m-max", "6"], "analyze_2_6.csv"),
        (["verify", "--m-max", "4"], "verify_2_4.csv"),
        (["verify", "--m-max", "4", "--histogram"], "verify_hist_2_4.csv"),
        (["channel-verify", "--l-max", "2"], "channel_verify_1_2.csv"),
        (["montecarlo", "--m", "8", "--trials", "500", "--seed", "9"], "montecarlo_m8_500_9.csv"),
    ],
)
def test_golden_outputs(capsys, argv, golden):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out == (GOLDEN / golden).read_text()


def test_outputs_repeat_byte_for_byte(capsys):
    argv = ["run", "--m", "20", "--seed", "77"]
    first = run(capsys, *argv)
    assert first[0] == 0
    assert run(capsys, *argv) == first


def test_verify_csv_rows(capsys):
    code, out, _ = run(capsys, "verify", "--m-max", "5")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert [int(r["m"]) for r in rows] == [2, 3, 4, 5]
    assert all(r["failures"] == "0" for r in rows)


def test_analyze_columns_agree(capsys):
    code, out, _ = run(capsys, "analyze", "--m-min", "2", "--m-max", "6")
    assert code == 0
    for r in csv.DictReader(io.StringIO(out)):
        a, b = float(r["triple_sum"]), float(r["closed_form"])
        assert abs(a - b) <= 1e-9 * max(1.0, b)


def test_analyze_with_exact_and_monte_carlo(capsys):
    code, out, _ = run(capsys, "analyze", "--m-min", "5", "--m-max", "6", "--exact")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert float(rows[0]["exact_mean"]) == pytest.approx(1273 / 155)
    assert float(rows[1]["exact_mean"]) == pytest.approx(2164 / 217)
    assert all(r["mc_mean"] == "" for r in rows)

    code, out, _ = run(capsys, "analyze", "--m-min", "8", "--m-max", "8", "--exact",
                       "--mc-trials", "200", "--seed", "4")
    (row,) = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    # m=8 is beyond exhaustive reach, so its exact column stays blank.
    assert row["exact_mean"] == ""
    assert float(row["mc_mean"]) > 0


def test_channel_simulate_json(capsys):
    code, out, _ = run(capsys, "channel-simulate", "--l", "1", "--m1", "1", "--m2", "0",
                       "--m3", "0")
    doc = json.loads(out)
    assert code == 0
    assert doc["y"] == [1] and doc["y_prime"] == [2]
    assert doc["decoded"] == [1, 0, 0] and doc["total"] == 2


def test_channel_verify_reports_pass(capsys):
    code, _, err = run(capsys, "channel-verify", "--l-max", "3", "--format", "json")
    assert code == 0
    assert err.count("PASS") == 3


def test_run_csv(capsys):
    code, out, _ = run(capsys, "run", "--m", "3", "--forged", "0,4,7", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert [r["stage"] for r in rows] == ["0A", "0B", "0C", "1", "2"]
    assert [int(r["outcome"]) for r in rows] == [1, 1, 1, 1, 0]


def test_out_file(tmp_path, capsys):
    target = tmp_path / "trace.json"
    code, out, _ = run(capsys, "run", "--m", "3", "--forged", "0,4,7", "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_text() == (GOLDEN / "run_m3_0_4_7.json").read_text()


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["run", "--m", "3"],
        ["run", "--m", "3", "--forged", "0,1,2", "--seed", "1"],
        ["run", "--m", "3", "--forged", "0,1"],
        ["run", "--m", "3", "--forged", "0,1,9"],
        ["run", "--m", "1", "--seed", "1"],
        ["run", "--m", "4", "--seed", "-1"],
        ["montecarlo", "--m", "5", "--trials", "10"],
        ["montecarlo", "--m", "5", "--trials", "0", "--seed", "1"],
        ["verify", "--m-max", "8"],
        ["verify", "--m-max", "3", "--m-min", "4"],
        ["analyze", "--m-min", "1", "--m-max", "3"],
        ["analyze", "--m-min", "2", "--m-max", "3", "--mc-trials", "10"],
        ["channel-simulate", "--l", "2", "--m1", "4", "--m2", "0", "--m3", "0"],
        ["channel-verify", "--l-max", "9"],
        ["run", "--m", "3", "--forged", "0,1,2", "--format", "xml"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err


def test_module_entry_point():
    result = subprocess.run(
        [sys.executable, "-m", "coinsearch", "channel-simulate", "--l", "2", "--m1", "3",
         "--m2", "1", "--m3", "2", "--format", "csv"],
        capture_output=True, text=True, check=True,
    )
    lines = result.stdout.splitlines()
    assert lines[0] == "stage,k,x1,x2,x3,output"
    assert len(lines) == 1 + 4


def test_verification_failure_exits_1(capsys, monkeypatch):
    from coinsearch import verification

    real = verification.exhaustive_verify

    def broken(m, workers=1):
        report = real(m, workers)
        report.failures.append({"forged": [0, 1, 2], "problems": ["injected"]})
        return report

    monkeypatch.setattr(verification, "exhaustive_verify", broken)
    code, out, _ = run(capsys, "verify", "--m-max", "3")
    assert code == 1
    assert list(csv.DictReader(io.StringIO(out)))[-1]["failures"] == "1"
