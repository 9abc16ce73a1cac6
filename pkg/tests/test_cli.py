"""Command-line behaviour and golden outputs.

Set MODEFISHER_REGEN_GOLDEN=1 to rewrite the files under tests/golden.
Goldens are compared numerically (rtol 1e-9) so they survive BLAS/FFT
rounding differences across platforms; determinism on one machine is
checked byte for byte.
"""
import csv
import json
import os
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from modefisher.cli import run

GOLDEN = Path(__file__).parent / "golden"
REGEN = os.environ.get("MODEFISHER_REGEN_GOLDEN") == "1"

CASES = {
    "qfi": ["qfi", "--psf", "gaussian", "--sigma", "2"],
    "modes": ["modes", "--psf", "gaussian", "--n-modes", "3", "--x-max", "6", "--every", "64"],
    "modes_json": ["modes", "--psf", "sinc", "--n-modes", "2", "--x-max", "3", "--every", "128", "--format", "json"],
    "fisher": ["fisher", "--psf", "sinc", "--n-modes", "4", "--s-max", "5", "--s-steps", "6", "--depth", "3"],
    "cumulative": ["cumulative", "--psf", "gaussian", "--basis", "hermite_gauss", "--hg-sigma", "1.2",
                   "--n-modes", "5", "--s", "0.5", "2"],
    "planewave": ["planewave", "--s-steps", "6"],
    "figure1": ["figure1", "--n-modes", "4", "--x-max", "12", "--every", "32"],
    "figure2": ["figure2", "--s", "1", "--n-modes", "120"],
    "figure3": ["figure3", "--s-steps", "16"],
}


def _suffix(args):
    return ".json" if "json" in args else ".csv"


def _close(a: str, b: str, rtol: float, atol: float) -> bool:
    try:
        x, y = float(a), float(b)
    except ValueError:
        return a == b
    return bool(np.isclose(x, y, rtol=rtol, atol=atol))


def assert_csv_matches(path: Path, golden: Path, rtol=1e-9, atol=1e-12):
    got = list(csv.reader(path.open()))
    ref = list(csv.reader(golden.open()))
    assert got[0] == ref[0], "header differs"
    assert len(got) == len(ref)
    for r1, r2 in zip(got[1:], ref[1:]):
        assert len(r1) == len(r2)
        assert all(_close(a, b, rtol, atol) for a, b in zip(r1, r2)), (r1, r2)


def assert_json_matches(a, b, rtol=1e-9, atol=1e-12):
    if isinstance(a, dict):
        assert a.keys() == b.keys()
        for k in a:
            assert_json_matches(a[k], b[k], rtol, atol)
    elif isinstance(a, list):
        assert len(a) == len(b)
        for u, v in zip(a, b):
            assert_json_matches(u, v, rtol, atol)
    elif isinstance(a, float) or isinstance(b, float):
        assert np.isclose(a, b, rtol=rtol, atol=atol), (a, b)
    else:
        assert a == b


def _check_golden(out: Path, name: str, rtol=1e-9, atol=1e-12):
    golden = GOLDEN / name
    if REGEN:
        shutil.copy(out, golden)
    assert golden.exists(), f"missing golden file {golden}"
    if out.suffix == ".json":
        assert_json_matches(json.loads(out.read_text()), json.loads(golden.read_text()), rtol, atol)
    else:
        assert_csv_matches(out, golden, rtol, atol)


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name, tmp_path):
    args = CASES[name]
    out = tmp_path / f"{name}{_suffix(args)}"
    assert run(args + ["--out", str(out)]) == 0
    _check_golden(out, f"{name}{_suffix(args)}")


def test_simulate_golden(tmp_path):
    out = tmp_path / "report.json"
    assert run(["simulate", "--config", str(GOLDEN / "simulate_config.toml"), "--out", str(out)]) == 0
    # estimates are refined to 1e-6, so compare them at that scale
    _check_golden(out, "simulate_report.json", rtol=1e-4, atol=1e-5)
    _check_golden(tmp_path / "report_estimates.csv", "simulate_estimates.csv", rtol=1e-4, atol=1e-5)


@pytest.mark.parametrize("name", ["fisher", "figure1", "modes_json"])
def test_byte_identical_reruns(name, tmp_path):
    args = CASES[name]
    a, b = tmp_path / f"a{_suffix(args)}", tmp_path / f"b{_suffix(args)}"
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_seed_override_is_deterministic(tmp_path):
    cfg = str(GOLDEN / "simulate_config.toml")
    for tag in ("a", "b"):
        assert run(["simulate", "--config", cfg, "--seed", "5", "--out", str(tmp_path / f"{tag}.json")]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert json.loads((tmp_path / "a.json").read_text())["seed"] == 5


def test_qfi_prints_six_digits(capsys):
    assert run(["qfi", "--psf", "sinc"]) == 0
    assert capsys.readouterr().out.strip() == "0.333333"


def test_figure2_shape(tmp_path):
    out = tmp_path / "f2.csv"
    assert run(["figure2", "--s", "1", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    adapted = np.array([float(r["F_adapted"]) for r in rows])
    hg = np.array([float(r["F_hermite_gauss"]) for r in rows])
    assert len(rows) == 150
    assert adapted[9] >= 0.985 / 3 and hg[99] < 0.985 / 3
    assert np.all(np.diff(adapted) >= 0) and np.all(np.diff(hg) >= -1e-15)


def test_stdout_table(capsys):
    assert run(["planewave", "--s-steps", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("s,F_sine,F_cosine")
    assert len(lines) == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["qfi", "--psf", "gaussian", "--sigma", "-1"],
        ["qfi", "--psf", "airy"],
        ["fisher", "--bogus"],
        ["fisher", "--s-min", "3", "--s-max", "1"],
        ["fisher", "--n-modes", "3", "--depth", "5"],
        ["nonsense"],
        [],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert run(argv) == 2
    assert capsys.readouterr().err


def test_numeric_failure_exit_1(capsys):
    assert run(["planewave", "--psf", "gaussian"]) == 1
    assert "NonSincError" in capsys.readouterr().err
    assert run(["modes", "--n-modes", "70"]) == 1
    assert "InstabilityError" in capsys.readouterr().err


def test_failed_write_leaves_no_partial_file(tmp_path):
    target = tmp_path / "missing_dir" / "out.csv"
    assert run(["qfi", "--out", str(target)]) == 1
    assert not target.exists()


def test_help_lists_defaults(capsys):
    assert run(["fisher", "--help"]) == 0
    text = capsys.readouterr().out
    assert "(default: 151)" in text and "(default: adapted)" in text


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "modefisher", "qfi", "--psf", "sinc"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.strip() == "0.333333"


def test_closed_pipe_exits_quietly():
    proc = subprocess.Popen(
        [sys.executable, "-m", "modefisher", "fisher", "--n-modes", "30", "--s-steps", "3000"],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE,
    )
    proc.stdout.readline()
    proc.stdout.close()
    err = proc.stderr.read()
    assert proc.wait() == 0
    assert b"Broken pipe" not in err and b"Traceback" not in err
