import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from coopshift.chain import TrapConfig, build_chain
from coopshift.cli import build_parser, main
from coopshift.config import KEYS, parse_config, parse_config_text
from coopshift.dipole import Transition, far_field_shift
from coopshift.errors import ConfigError
from coopshift.experiment import MeasurementSeries, predicted_shifts

SMALL = """\
# short run
ions = 2
distance_settings = 5.0, 5.2
cycles = 24
measurements_per_dwell = 20
seed = 4
"""


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


# config parsing


def test_parse_minimal_config():
    cfg = parse_config_text("ions = 3\n")
    assert cfg["ions"] == 3
    assert cfg["distance_settings"] == (5.0, 5.2)
    assert cfg.experiment().cycles == KEYS["cycles"].default
    assert cfg.trap_template().ion_count == 3


def test_parse_full_config(tmp_path):
    text = "\n".join([
        "ions = 4", "polarization = par", "distance_settings = 4.8, 5.0, 5.4",
        "schedule = mirrored  # ABBA", "drift_linear_khz_per_hour = 12.5", "compare_settings = 2, 0",
    ])
    p = tmp_path / "run.cfg"
    p.write_text(text)
    cfg = parse_config(p)
    assert cfg["polarization"] == "par"
    assert cfg.experiment().schedule == "mirrored"
    assert cfg.experiment().drift.linear_rate == 12.5
    assert cfg["compare_settings"] == (2, 0)
    assert cfg.echo()["distance_settings"] == [4.8, 5.0, 5.4]


@pytest.mark.parametrize("text,key,line", [
    ("ions = 0\n", "ions", 1),
    ("# comment\n\nionz = 2\n", "ionz", 3),
    ("ions = 2\nions = 3\n", "ions", 2),
    ("seed = abc\n", "seed", 1),
    ("detection_efficiency = 2\n", "detection_efficiency", 1),
    ("schedule = shuffled\n", "schedule", 1),
    ("polarization = diagonal\n", "polarization", 1),
])
def test_config_errors_name_key_and_line(text, key, line):
    with pytest.raises(ConfigError) as info:
        parse_config_text(text)
    assert info.value.key == key
    assert info.value.line == line
    assert key in str(info.value) and f"line {line}" in str(info.value)


def test_config_missing_equals_and_bad_compare():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config_text("ions 2\n")
    with pytest.raises(ConfigError, match="compare_settings"):
        parse_config_text("compare_settings = 0, 3\n")


def test_missing_config_file(tmp_path, capsys):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "nope.cfg")
    code, _, err = run(["simulate", "--config", str(tmp_path / "nope.cfg"), "--out-dir", str(tmp_path)], capsys)
    assert code == 2 and "nope.cfg" in err


# help


@pytest.mark.parametrize("command", ["chain", "shift", "curve", "simulate", "allan", "fit"])
def test_subcommand_help_documents_flags(command, capsys):
    parser = build_parser()
    with pytest.raises(SystemExit) as info:
        parser.parse_args([command, "--help"])
    assert info.value.code == 0
    text = capsys.readouterr().out
    sub = parser._subparsers._group_actions[0].choices[command]
    for action in sub._actions:
        for opt in action.option_strings:
            assert opt in text
    if command == "simulate":
        for key in KEYS:
            assert key in text


# subcommands


def test_chain_command(capsys):
    code, out, _ = run(["chain", "--ions", "4", "--axial-freq-mhz", "0.3"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4
    ref = build_chain(TrapConfig(4, 0.3))
    np.testing.assert_allclose([float(r["r_m_um"]) for r in rows], ref.positions, rtol=1e-9)


def test_chain_domain_error_exit_code(capsys):
    code, out, err = run(["chain", "--ions", "0", "--axial-freq-mhz", "0.3"], capsys)
    assert code != 0 and out == "" and "ion_count" in err
    code, _, err = run(["chain", "--ions", "2", "--axial-freq-mhz", "-1"], capsys)
    assert code != 0


def test_shift_command(capsys):
    code, out, _ = run(["shift", "--separation-um", "5.0"], capsys)
    assert code == 0
    data = json.loads(out)
    d = far_field_shift(5.0, Transition())
    assert data["delta_mhz"] == pytest.approx(d, rel=1e-12)
    assert data["observed_shift_khz"]["perp"] == pytest.approx(0.5 * d * 1e3, rel=1e-9)
    assert data["observed_shift_khz"]["par"] == pytest.approx(0.0, abs=1e-12)
    assert len(data["eigenvalues_mhz"]) == 8
    code, _, err = run(["shift", "--separation-um", "0"], capsys)
    assert code != 0 and err


def test_curve_command(capsys, tmp_path):
    code, _, _ = run(["curve", "--ions", "3", "--spacing-min", "4.6", "--spacing-max", "5.9",
                      "--points", "7", "--out-dir", str(tmp_path), "--quiet"], capsys)
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "curve.csv").open()))
    r = [float(x["spacing_um"]) for x in rows]
    np.testing.assert_allclose([float(x["shift_khz"]) for x in rows],
                               predicted_shifts(r, TrapConfig(3, 0.5), Transition()), rtol=1e-8)
    assert rows[0]["smeared_shift_khz"] == ""
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["outputs"] == ["curve.csv"]


def test_curve_with_thermal(capsys):
    code, out, _ = run(["curve", "--ions", "2", "--spacing-min", "4.6", "--spacing-max", "5.9", "--points", "3",
                        "--thermal-sigma-um", "0.02", "--samples", "500", "--seed", "3"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert all(float(x["stderr_khz"]) > 0 for x in rows)


def test_curve_rejects_bad_range(capsys):
    code, _, _ = run(["curve", "--ions", "2", "--spacing-min", "6", "--spacing-max", "5", "--points", "3"], capsys)
    assert code != 0


@pytest.fixture
def small_config(tmp_path):
    p = tmp_path / "small.cfg"
    p.write_text(SMALL)
    return p


def test_simulate_outputs(small_config, tmp_path, capsys):
    out = tmp_path / "run"
    code, _, _ = run(["simulate", "--config", str(small_config), "--out-dir", str(out), "--quiet"], capsys)
    assert code == 0
    written = sorted(p.name for p in out.iterdir())
    manifest = json.loads((out / "manifest.json").read_text())
    assert sorted(manifest["outputs"] + ["manifest.json"]) == written
    assert manifest["seed"] == 4
    summary = json.loads((out / "summary.json").read_text())
    assert json.loads(json.dumps(summary)) == summary
    assert summary["config"]["cycles"] == 24
    assert summary["records"] + summary["skipped"] == 24 * 2 * 20
    series = MeasurementSeries.from_csv((out / "series.csv").read_text())
    assert len(series) == summary["records"]
    hist = list(csv.DictReader((out / "histogram.csv").open()))
    assert sum(int(h["count"]) for h in hist) == summary["relative_shift"]["count"]


def test_simulate_byte_identical_and_seed_override(small_config, tmp_path, capsys):
    for name in ("a", "b"):
        assert main(["simulate", "--config", str(small_config), "--out-dir", str(tmp_path / name), "--quiet"]) == 0
    assert (tmp_path / "a" / "series.csv").read_bytes() == (tmp_path / "b" / "series.csv").read_bytes()
    assert (tmp_path / "a" / "summary.json").read_bytes() == (tmp_path / "b" / "summary.json").read_bytes()
    assert main(["simulate", "--config", str(small_config), "--out-dir", str(tmp_path / "c"),
                 "--seed", "5", "--quiet"]) == 0
    assert (tmp_path / "a" / "series.csv").read_bytes() != (tmp_path / "c" / "series.csv").read_bytes()
    assert json.loads((tmp_path / "c" / "manifest.json").read_text())["seed"] == 5


def test_allan_command(small_config, tmp_path, capsys):
    assert main(["simulate", "--config", str(small_config), "--out-dir", str(tmp_path), "--quiet"]) == 0
    series = tmp_path / "series.csv"
    code, out, _ = run(["allan", "--series", str(series), "--setting", "0", "--reference", "1"], capsys)
    assert code == 0
    assert out == (tmp_path / "allan.csv").read_text()
    code, out, _ = run(["allan", "--series", str(series), "--setting", "0"], capsys)
    assert code == 0
    assert out == (tmp_path / "allan_absolute.csv").read_text()
    code, _, _ = run(["allan", "--series", str(series), "--setting", "7"], capsys)
    assert code != 0


def test_fit_command(tmp_path, capsys):
    r = np.linspace(4.6, 5.9, 8)
    y = predicted_shifts(r, TrapConfig(2, 0.5), Transition()) + 12.0
    data = tmp_path / "data.csv"
    data.write_text("spacing_um,shift_khz,sigma_khz\n" + "".join(f"{a!s},{float(b)!r},2.2\n" for a, b in zip(r, y)))
    code, out, _ = run(["fit", "--data", str(data)], capsys)
    assert code == 0
    res = json.loads(out)
    assert res["a0_mhz"] == pytest.approx(20.05, rel=1e-6)
    assert res["points"] == 8
    code, _, err = run(["fit", "--data", str(data), "--pol", "par"], capsys)
    assert code != 0 and "unidentifiable" in err
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    code, _, _ = run(["fit", "--data", str(bad)], capsys)
    assert code != 0


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "coopshift", "shift", "--separation-um", "5.2"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["separation_um"] == 5.2
