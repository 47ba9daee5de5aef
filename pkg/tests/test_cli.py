"""
Test the command-line front end: outputs, headers, reproducibility and exit codes.
"""
import json
import sys
from pathlib import Path

import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from cli import main, parse_int_range
from utils.output import read_csv

DATA_DIR = Path(__file__).parent.parent / "data" / "instances"


def run(*argv: str) -> int:
    return main(list(argv))


def test_int_ranges():
    assert parse_int_range("1..4") == [1, 2, 3, 4]
    assert parse_int_range("1,3,5") == [1, 3, 5]


def test_landscape_report(tmp_path):
    out = tmp_path / "landscape.json"
    assert run("landscape", "--instance", str(DATA_DIR / "chain.json"), "--N", "1,5",
               "--lambda-points", "5", "--output", str(out)) == 0
    document = json.loads(out.read_text())
    report = document["report"]
    assert document["tool"].startswith("ensemble-aqc")
    assert "wall_clock" in document
    assert report["delta"] == pytest.approx(3.0)
    assert report["Nc"] == 2
    assert report["sigma_star"] == [-1, -1, -1]
    assert report["Delta"]["5"] == pytest.approx(15.0)
    assert "trajectories" not in report

    samples = read_csv(tmp_path / "landscape_trajectories.csv")
    assert list(samples.columns) == ["n", "eps", "f"]
    # 7 trajectories from the ground corner, 5 points each
    assert len(samples) == 35
    assert (samples["f"] >= -1e-12).all()
    header = (tmp_path / "landscape_trajectories.csv").read_text().splitlines()[0]
    assert header.startswith("# tool: ensemble-aqc")


def test_fraction_curve(tmp_path):
    out = tmp_path / "fraction.csv"
    assert run("landscape", "--M", "3", "--seed", "1", "--samples", "200", "--N", "1,2,4,8",
               "--output", str(out)) == 0
    table = read_csv(out)
    assert list(table.columns) == ["N", "fraction", "samples", "degenerate"]
    assert table["fraction"].is_monotonic_decreasing


def test_csv_header_block(tmp_path):
    out = tmp_path / "mingap.csv"
    assert run("mingap", "--family", "ferro", "--M", "3", "--K", "0.2", "--N", "1",
               "--lambda-points", "11", "--output", str(out)) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# tool: ensemble-aqc")
    assert lines[1].startswith("# config: ")
    assert lines[2] == "# seed: none"
    assert lines[3].startswith("# wall_clock: ")
    assert lines[4] == "N,lambda,gap"
    table = read_csv(out)
    assert len(table) == 11
    assert table["gap"].iloc[0] == pytest.approx(2.0)


def test_outputs_are_byte_identical(tmp_path):
    out = tmp_path / "spectrum.csv"
    argv = ("spectrum", "--instance", "chain", "--N", "2", "--lambda-points", "7",
            "--levels", "4", "--no-wall-clock", "--output", str(out))
    assert run(*argv) == 0
    first = out.read_bytes()
    assert run(*argv) == 0
    assert out.read_bytes() == first
    assert b"wall_clock" not in first


def test_meanfield_table(tmp_path):
    out = tmp_path / "meanfield.csv"
    assert run("meanfield", "--instance", "chain", "--N", "5", "--lambda-points", "5",
               "--output", str(out)) == 0
    table = read_csv(out)
    assert "mf_gap" in table.columns and "E0_MF" in table.columns
    assert table["mf_gap"].iloc[-1] == pytest.approx(3.0)


def test_anneal_writes_levels(tmp_path):
    out = tmp_path / "anneal.csv"
    assert run("anneal", "--instance", "chain", "--N", "1,2", "--tau", "2", "--steps", "400",
               "--output", str(out)) == 0
    table = read_csv(out)
    assert list(table["N"]) == [1, 2]
    assert ((table["error"] >= 0) & (table["error"] <= 1)).all()
    levels = read_csv(tmp_path / "anneal_levels.csv")
    assert len(levels) == 27
    assert levels["probability"].sum() == pytest.approx(1.0, abs=1e-6)


def test_gen_and_batch(tmp_path):
    set_dir = tmp_path / "set"
    assert run("gen", "--M", "3", "--count", "2", "--filter-nc", "gt:0", "--seed", "1",
               "--output", str(set_dir)) == 0
    assert len(list(set_dir.glob("*.json"))) == 2
    assert len(read_csv(set_dir / "summary.csv")) == 2

    out = tmp_path / "batch.csv"
    assert run("batch", "--M", "3", "--count", "2", "--filter-nc", "gt:0", "--seed", "1",
               "--N", "1", "--tau", "2", "--steps", "200", "--n-jobs", "1", "--output", str(out)) == 0
    summary = read_csv(out)
    assert list(summary.columns) == ["N", "tau", "mean_error", "instances", "failed"]
    assert summary["instances"].iloc[0] == 2
    assert len(read_csv(tmp_path / "batch_raw.csv")) == 2


def test_negativity_trace(tmp_path):
    out = tmp_path / "negativity.csv"
    assert run("negativity", "--family", "ferro", "--M", "2", "--K", "0.1", "--N", "1",
               "--tau", "2", "--steps", "400", "--samples", "5", "--output", str(out)) == 0
    table = read_csv(out)
    assert len(table) == 5
    assert (table["log_negativity"] >= 0).all()


# ============================================================================
# Failures
# ============================================================================

def error_line(capsys) -> str:
    return capsys.readouterr().err.strip().splitlines()[-1]


def test_malformed_instance_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"M": 2, "J": [[0, 1], [2, 0]], "K": [0, 0]}')
    assert run("landscape", "--instance", str(bad), "--output", str(tmp_path / "x.json")) == 4
    assert error_line(capsys).startswith("error=InstanceValidationError code=4 message=symmetry error")


def test_unparsable_instance_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("landscape", "--instance", str(bad), "--output", str(tmp_path / "x.json")) == 4
    assert error_line(capsys).startswith("error=InstanceFormatError code=4")


def test_config_errors(tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    assert run("spectrum", "--instance", "no_such_instance", "--output", out) == 2
    assert error_line(capsys).startswith("error=ConfigError code=2")
    assert run("anneal", "--instance", "chain", "--gamma-z", "-1", "--output", out) == 2
    assert run("anneal", "--instance", "chain", "--mode", "sideways", "--output", out) == 2
    assert run("spectrum", "--output", out) == 2


def test_guard_exit_code(tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    assert run("anneal", "--instance", "chain", "--mode", "individual", "--N", "5",
               "--gamma-z", "0.01", "--output", out) == 5
    assert error_line(capsys).startswith("error=GuardLimitError code=5")


def test_missing_instance_file_exit_code(tmp_path, capsys):
    out = str(tmp_path / "x.json")
    # a missing file never falls back to the built-in instance of the same name
    assert run("landscape", "--instance", str(tmp_path / "typo_dir" / "chain.json"), "--output", out) == 3
    assert error_line(capsys).startswith("error=OutputError code=3")
    assert run("landscape", "--instance", "chain.json", "--output", out) == 3
    assert not Path(out).exists()
    assert run("landscape", "--instance", "chain", "--output", out) == 0


def test_individual_mode_rejects_sx_dephasing(tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    assert run("anneal", "--instance", "chain", "--mode", "individual", "--N", "1",
               "--gamma-x", "0.1", "--output", out) == 2
    assert error_line(capsys).startswith("error=ConfigError code=2")


def test_degenerate_anneal_writes_nothing(tmp_path, capsys):
    out = tmp_path / "anneal.csv"
    assert run("anneal", "--family", "ferro", "--M", "3", "--K", "0", "--N", "1", "--tau", "1",
               "--steps", "100", "--output", str(out)) == 4
    assert error_line(capsys).startswith("error=DegenerateGroundStateError code=4")
    assert not out.exists()
    assert not (tmp_path / "anneal_levels.csv").exists()
