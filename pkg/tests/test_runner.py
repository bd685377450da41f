"""
test_runner.py
==============

Unit tests for configuration loading, result writing, the subcommands
and the command-line script.

Author: Dênio Barbosa Júnior
Created: 2026-10-15
"""

import importlib.util
import json
import os
from dataclasses import replace
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pandas as pd
import pytest
from loguru import logger

from magnetometer.config import SweepSpec, baseline_config
from runner.commands import (
    cmd_calibrate,
    cmd_optimize_mode,
    cmd_pn_limit,
    cmd_simulate,
    cmd_spectrum,
    cmd_sweep,
)
from runner.config_loader import SECTIONS, ConfigError, config_from_dict, dataclass_keys, load_config
from runner.utils import format_duration, parse_quantity, validate_dataframe
from runner.writer import ResultWriter, RunManifest, to_builtin


ROOT = Path(__file__).resolve().parents[1]
PROFILES = ROOT / "profiles"


def _write_yaml(tmp_path, text):
    path = tmp_path / "config.yml"
    path.write_text(text, encoding="utf-8")
    return path


def _read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


class TestParseQuantity:
    """Test unit-suffixed quantities."""

    @pytest.mark.parametrize(
        "value, dimension, expected",
        [
            ("36 fT", "field", 36e-15),
            ("0.92 G", "field", 0.92e-4),
            ("15 ms", "time", 15e-3),
            ("322 kHz", "frequency", 322e3),
            ("0.43 ms^-1", "rate", 430.0),
            ("3.6e11", "dimensionless", 3.6e11),
            (5, "time", 5.0),
        ],
    )
    def test_valid(self, value, dimension, expected):
        """Test conversion to SI."""
        assert parse_quantity(value, dimension) == pytest.approx(expected)

    def test_wrong_dimension(self):
        """Test that a time unit is rejected for a field."""
        with pytest.raises(ValueError, match="expected a field"):
            parse_quantity("15 ms", "field")

    def test_unknown_unit(self):
        """Test that unknown units are rejected."""
        with pytest.raises(ValueError, match="Unknown unit"):
            parse_quantity("3 furlongs", "time")

    def test_unparseable(self):
        """Test that text without a number is rejected."""
        with pytest.raises(ValueError, match="Cannot parse"):
            parse_quantity("fast", "time")

    def test_boolean_rejected(self):
        """Test that YAML booleans are not numbers."""
        with pytest.raises(ValueError):
            parse_quantity(True, "time")


class TestLoadConfig:
    """Test YAML configuration loading."""

    @pytest.fixture(autouse=True)
    def no_env_out_dir(self, monkeypatch):
        monkeypatch.delenv("MAGSIM_OUTPUT_DIR", raising=False)

    def test_baseline_profile(self):
        """Test the shipped projection-noise profile."""
        config = load_config(PROFILES / "baseline.yml")

        assert config.protocol == "pn"
        assert config.ensemble.gamma_swap == pytest.approx(430.0)
        assert config.ensemble.n_atoms_per_cell == pytest.approx(7.2e11)
        assert config.rf.amplitude == pytest.approx(36e-15)
        assert config.b_dc == pytest.approx(0.92e-4)
        assert config.output.out_dir == "results/baseline"

    def test_entanglement_profile(self):
        """Test the shipped entanglement profile."""
        config = load_config(PROFILES / "entanglement.yml")

        assert config.protocol == "entangled"
        assert config.ensemble.gamma_swap == pytest.approx(112.9)
        assert config.rf.duration == pytest.approx(0.88e-3)
        assert config.sweep.values == pytest.approx([0.1e-3, 1e-3, 2e-3, 4e-3, 8e-3, 16e-3])

    def test_empty_file_gives_defaults(self, tmp_path):
        """Test that an empty file yields the baseline profile."""
        assert load_config(_write_yaml(tmp_path, "")) == baseline_config()

    def test_partial_section_keeps_defaults(self):
        """Test that unspecified fields keep their profile values."""
        config = config_from_dict({"profile": "entanglement", "ensemble": {"beta0": 0.2}})

        assert config.ensemble.beta0 == 0.2
        assert config.ensemble.gamma_swap == pytest.approx(112.9)

    def test_negative_t2(self, tmp_path):
        """Test that a negative T2 is rejected with the field name."""
        path = _write_yaml(tmp_path, "ensemble:\n  t2_dark: -1 ms\n")

        with pytest.raises(ConfigError, match="t2_dark"):
            load_config(path)

    def test_invalid_value_reports_key_and_line(self, tmp_path):
        """Test that a value failing validation names its dotted key and line."""
        path = _write_yaml(tmp_path, "protocol: pn\nensemble:\n  t2_dark: -1 ms\n")

        with pytest.raises(ConfigError) as excinfo:
            load_config(path)

        assert excinfo.value.key == "ensemble.t2_dark"
        assert excinfo.value.line == 3
        assert "line 3" in str(excinfo.value)

    def test_invalid_top_level_value_reports_line(self, tmp_path):
        """Test that a failing top-level value names its key and line."""
        path = _write_yaml(tmp_path, "protocol: pn\nn_shots: 0\n")

        with pytest.raises(ConfigError) as excinfo:
            load_config(path)

        assert excinfo.value.key == "n_shots"
        assert excinfo.value.line == 2

    def test_cross_field_error_names_key(self):
        """Test that a cell layout mismatch is reported against cell_config."""
        with pytest.raises(ConfigError) as excinfo:
            config_from_dict({"cell_config": "one"})

        assert excinfo.value.key == "cell_config"
        assert excinfo.value.line is None

    def test_unknown_key_reports_line(self, tmp_path):
        """Test that an unknown key names its dotted key and line."""
        path = _write_yaml(tmp_path, "protocol: pn\nensemble:\n  T3: 5 ms\n")

        with pytest.raises(ConfigError) as excinfo:
            load_config(path)

        assert excinfo.value.key == "ensemble.T3"
        assert excinfo.value.line == 3
        assert "line 3" in str(excinfo.value)

    def test_unknown_top_level_key(self):
        """Test that unknown top-level keys are rejected."""
        with pytest.raises(ConfigError, match="Unknown config key 'seed'"):
            config_from_dict({"seed": 3})

    def test_malformed_yaml(self, tmp_path):
        """Test that malformed YAML raises ConfigError."""
        path = _write_yaml(tmp_path, "ensemble: [1, 2\n")

        with pytest.raises(ConfigError, match="Malformed"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        """Test that an unreadable file raises ConfigError."""
        with pytest.raises(ConfigError, match="Cannot read"):
            load_config(tmp_path / "missing.yml")

    def test_wrong_unit(self):
        """Test that a field given in seconds is rejected."""
        with pytest.raises(ConfigError, match="rf.amplitude"):
            config_from_dict({"rf": {"amplitude": "36 ms"}})

    def test_unknown_profile(self):
        """Test that an unknown base profile is rejected."""
        with pytest.raises(ConfigError, match="profile"):
            config_from_dict({"profile": "optimistic"})

    def test_carrier_in_kilohertz(self):
        """Test that a carrier in Hz is converted to rad/s."""
        config = config_from_dict({"rf": {"carrier": "20 kHz"}})

        assert config.rf.carrier == pytest.approx(2 * np.pi * 20e3)

    def test_output_dir_from_environment(self):
        """Test MAGSIM_OUTPUT_DIR when the file sets no output directory."""
        with patch.dict(os.environ, {"MAGSIM_OUTPUT_DIR": "/tmp/magsim"}):
            assert config_from_dict({}).output.out_dir == "/tmp/magsim"
            explicit = config_from_dict({"output": {"out_dir": "here"}})

        assert explicit.output.out_dir == "here"

    def test_loader_keys_are_fields(self):
        """Test that every loader key maps onto a dataclass field."""
        fields = dataclass_keys()

        for section, parsers in SECTIONS.items():
            assert set(parsers) <= set(fields[section])


class TestResultWriter:
    """Test output writing."""

    def test_json_sanitized(self, tmp_path):
        """Test numpy values and NaN in JSON output."""
        writer = ResultWriter(tmp_path)

        path = writer.write_json({"b": np.arange(2), "a": np.float64("nan"), "n": np.int64(3)}, "x.json")

        assert _read_json(path) == {"a": None, "b": [0, 1], "n": 3}
        assert path.read_text().index('"a"') < path.read_text().index('"b"')

    def test_to_builtin_nested(self):
        """Test recursive conversion."""
        assert to_builtin({"x": (np.float32(1.5), float("inf"))}) == {"x": [1.5, None]}

    def test_frame_validation(self, tmp_path):
        """Test that frames missing columns are rejected."""
        writer = ResultWriter(tmp_path)

        with pytest.raises(ValueError, match="Missing"):
            writer.write_frame(pd.DataFrame({"a": [1]}), "x.csv", ["a", "b"])
        with pytest.raises(ValueError, match="empty"):
            writer.write_frame(pd.DataFrame(), "y.csv", ["a"])

    def test_manifest_lists_files(self, tmp_path):
        """Test that the manifest lists every file, itself included."""
        writer = ResultWriter(tmp_path)
        writer.write_frame(pd.DataFrame({"a": [1.0]}), "table.csv")

        writer.write_manifest(RunManifest("simulate", "abc", 1, 10, 1))

        manifest = _read_json(tmp_path / "manifest.json")
        assert manifest["files"] == ["manifest.json", "table.csv"]
        assert manifest["finished_at"] is not None

    def test_retry_on_transient_error(self, tmp_path):
        """Test that a write succeeds after one transient OSError."""
        writer = ResultWriter(tmp_path)
        real_write = Path.write_text
        calls = []

        def flaky(self, *args, **kwargs):
            calls.append(self)
            if len(calls) == 1:
                raise OSError("disk busy")
            return real_write(self, *args, **kwargs)

        with patch.object(Path, "write_text", flaky):
            writer.write_json({"ok": True}, "retry.json")

        assert len(calls) == 2
        assert _read_json(tmp_path / "retry.json") == {"ok": True}


class TestUtils:
    """Test small helpers."""

    def test_validate_dataframe(self):
        """Test column checks."""
        assert validate_dataframe(pd.DataFrame({"a": [1]}), ["a"])
        with pytest.raises(ValueError):
            validate_dataframe(pd.DataFrame({"a": [1]}), ["b"])

    @pytest.mark.parametrize("seconds, expected", [(12.34, "12.3s"), (125.5, "2m 5.5s")])
    def test_format_duration(self, seconds, expected):
        """Test human-readable durations."""
        assert format_duration(seconds) == expected


class TestCommands:
    """Test the subcommands end to end on small runs."""

    def test_pn_limit(self, baseline, tmp_path):
        """Test B_min and sensitivity for the baseline parameters."""
        summary = cmd_pn_limit(baseline, out_dir=str(tmp_path))

        assert summary["b_min"] == pytest.approx(2.24e-15, rel=0.01)
        assert summary["sensitivity"] == pytest.approx(2.7e-16, rel=0.02)
        assert _read_json(tmp_path / "pn_limit.json")["n_total"] == pytest.approx(1.44e12)
        assert (tmp_path / "manifest.json").exists()

    def test_simulate_reproducible(self, baseline, tmp_path):
        """Test byte-identical outputs for equal config and seed."""
        first, second = tmp_path / "first", tmp_path / "second"

        cmd_simulate(baseline, n_shots=50, master_seed=42, out_dir=str(first))
        cmd_simulate(baseline, n_shots=50, master_seed=42, out_dir=str(second))

        for name in ("shots.csv", "shots_reference.csv", "summary.json"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_simulate_summary(self, baseline, tmp_path):
        """Test the keys and files of a projection-noise run."""
        summary = cmd_simulate(baseline, n_shots=50, master_seed=1, out_dir=str(tmp_path))

        assert summary["n_shots"] == 50
        assert summary["readout"]["snr"] > 0
        assert summary["analytic"]["snr"] == pytest.approx(13.48, rel=0.005)
        assert "epr_variance" not in summary
        shots = pd.read_csv(tmp_path / "shots.csv")
        assert list(shots.columns) == ["shot_id", "pulse_id", "s2c", "s2s"]
        assert len(shots) == 50
        manifest = _read_json(tmp_path / "manifest.json")
        assert "data_dictionary.md" in manifest["files"]
        assert manifest["config_hash"] == summary["config_hash"]

    def test_simulate_single_shot(self, baseline, tmp_path):
        """Test that one shot writes its outcomes without variance figures."""
        summary = cmd_simulate(baseline, n_shots=1, master_seed=3, out_dir=str(tmp_path))

        assert len(pd.read_csv(tmp_path / "shots.csv")) == 1
        assert len(pd.read_csv(tmp_path / "shots_reference.csv")) == 1
        written = _read_json(tmp_path / "summary.json")
        assert written["readout"] is None
        assert written["noise_budget"] is None
        assert written["sensitivity"] is None
        assert written["signal"]["probe2"]["var_s2c"] is None
        assert np.isfinite(written["signal"]["probe2"]["mean_s2c"])
        assert summary["analytic"]["snr"] > 0

    def test_simulate_single_shot_entangled(self, entangled, tmp_path):
        """Test that a single entangled shot reports no EPR figures."""
        summary = cmd_simulate(entangled, n_shots=1, out_dir=str(tmp_path))

        assert summary["epr_variance"] is None
        assert summary["atomic_noise_pn"] is None
        assert len(pd.read_csv(tmp_path / "shots.csv")) == 2

    def test_simulate_entangled(self, entangled, tmp_path):
        """Test the entanglement figures in the summary."""
        summary = cmd_simulate(entangled, n_shots=60, out_dir=str(tmp_path))

        assert "epr_variance" in summary
        assert "atomic_noise_pn" in summary
        assert len(pd.read_csv(tmp_path / "shots.csv")) == 120

    def test_simulate_time_series(self, time_domain, tmp_path):
        """Test the optional photocurrent export."""
        config = replace(time_domain, output=replace(time_domain.output, write_time_series=True))

        cmd_simulate(config, n_shots=10, out_dir=str(tmp_path))

        series = pd.read_csv(tmp_path / "timeseries.csv")
        assert list(series.columns) == ["t_or_f", "value"]
        assert len(series) == 600

    def test_calibrate(self, baseline, tmp_path):
        """Test the calibration summary."""
        summary = cmd_calibrate(baseline, n_shots=200, out_dir=str(tmp_path))

        assert summary["kappa_squared_effective"] == pytest.approx(0.8 * summary["kappa_squared"])
        assert summary["kappa_squared_model"] == pytest.approx(5.82, rel=0.01)
        assert summary["kappa_squared_stderr"] > 0
        assert summary["noise_budget"] is not None
        assert (tmp_path / "calibration_shots.csv").exists()

    def test_calibrate_rf_kappa(self, baseline, tmp_path):
        """Test the RF-referenced kappa of both readout pulses."""
        cmd_calibrate(baseline, n_shots=50, out_dir=str(tmp_path))

        rf_kappa = _read_json(tmp_path / "calibration.json")["rf_kappa"]
        assert set(rf_kappa) == {"probe1", "probe2"}
        for pulse in rf_kappa.values():
            assert 0 < pulse["kappa_squared"] <= pulse["kappa_squared_model"] * (1 + 1e-9)
            assert pulse["displacement_pn"] > 0

    def test_calibrate_without_rf(self, baseline, tmp_path):
        """Test that a zero RF amplitude leaves the RF-referenced kappa empty."""
        config = replace(baseline, rf=replace(baseline.rf, amplitude=0.0))

        summary = cmd_calibrate(config, n_shots=50, out_dir=str(tmp_path))

        assert summary["rf_kappa"] == {"probe1": None, "probe2": None}

    def test_simulate_delegates_calibration(self, baseline, tmp_path):
        """Test that the calibration protocol writes calibration.json."""
        cmd_simulate(replace(baseline, protocol="calibration"), n_shots=20, out_dir=str(tmp_path))

        assert (tmp_path / "calibration.json").exists()
        assert not (tmp_path / "summary.json").exists()

    def test_sweep_rf_duration(self, entangled, tmp_path):
        """Test the improvement factor of an analytic RF-duration sweep."""
        config = replace(
            entangled,
            sweep=SweepSpec(variable="rf.duration", values=[0.44e-3, 0.88e-3, 1.76e-3], method="analytic"),
        )

        summary = cmd_sweep(config, out_dir=str(tmp_path))

        factor = summary["improvement_factor"]
        assert factor["x"] == pytest.approx([0.44e-3, 0.88e-3, 1.76e-3])
        assert all(ratio > 0 for ratio in factor["ratio"])
        assert "lifetime_fit" not in summary
        frame = pd.read_csv(tmp_path / "sweep.csv")
        assert set(frame["quantity"]) >= {"atomic_noise", "snr", "sensitivity", "snr_times_bandwidth"}

    def test_sweep_delay(self, entangled, tmp_path):
        """Test the lifetime fit of an analytic delay sweep."""
        config = replace(
            entangled,
            sweep=SweepSpec(variable="delay", values=[0.1e-3, 2e-3, 4e-3, 8e-3], method="analytic"),
        )

        summary = cmd_sweep(config, out_dir=str(tmp_path))

        fit = summary["lifetime_fit"]
        assert fit["lifetime_bandwidth"] == pytest.approx(1 / (np.pi * fit["lifetime"]))

    def test_optimize_mode(self, baseline, tmp_path):
        """Test the mode scan outputs on a small grid."""
        config = replace(baseline, mode_gamma_grid=[400.0, 900.0])

        summary = cmd_optimize_mode(config, out_dir=str(tmp_path))

        assert summary["gamma_opt"] in (400.0, 900.0)
        assert summary["gamma_total"] == pytest.approx(500.0)
        assert len(pd.read_csv(tmp_path / "mode_scan.csv")) == 2

    def test_spectrum(self, time_domain, tmp_path):
        """Test the spectrum outputs at a low carrier."""
        summary = cmd_spectrum(time_domain, out_dir=str(tmp_path))

        assert summary["carrier_frequency"] == pytest.approx(20e3)
        assert summary["n_samples"] == 600
        assert summary["frequency_resolution"] == pytest.approx(1 / 3e-3)
        assert list(pd.read_csv(tmp_path / "spectrum.csv").columns) == ["t_or_f", "value"]

    def test_spectrum_nyquist(self, time_domain, tmp_path):
        """Test that an aliasing sample rate is rejected."""
        config = replace(time_domain, lockin=replace(time_domain.lockin, sample_rate=30e3))

        with pytest.raises(ValueError, match="Nyquist"):
            cmd_spectrum(config, out_dir=str(tmp_path))

    def test_invalid_override(self, baseline, tmp_path):
        """Test that a zero shot count is rejected before running."""
        with pytest.raises(ValueError, match="n_shots"):
            cmd_simulate(baseline, n_shots=0, out_dir=str(tmp_path))


@pytest.fixture
def script(monkeypatch, tmp_path):
    """The command-line module, run from a scratch directory."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("MAGSIM_OUTPUT_DIR", raising=False)
    spec = importlib.util.spec_from_file_location(
        "magnetometer_sim", ROOT / "scripts" / "magnetometer_sim.py"
    )
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    yield module
    logger.remove()


class TestScript:
    """Test the command-line entry point and its exit codes."""

    def test_pn_limit_prints_json(self, script, tmp_path, capsys):
        """Test exit code 0 and the printed limit."""
        code = script.main(["pn-limit", "--out", str(tmp_path / "out")])

        assert code == script.EXIT_OK
        printed = json.loads(capsys.readouterr().out)
        assert printed["b_min"] == pytest.approx(2.24e-15, rel=0.01)
        assert (tmp_path / "out" / "pn_limit.json").exists()

    def test_config_error(self, script, tmp_path):
        """Test exit code 2 for an invalid configuration file."""
        path = _write_yaml(tmp_path, "ensemble:\n  t2_dark: -1 ms\n")

        assert script.main(["pn-limit", "--config", str(path)]) == script.EXIT_CONFIG

    def test_invalid_override(self, script):
        """Test exit code 2 for a bad command-line override."""
        assert script.main(["simulate", "--shots", "0"]) == script.EXIT_CONFIG

    def test_runtime_error(self, script, tmp_path):
        """Test exit code 3 when a command fails."""
        def failing(config):
            raise RuntimeError("boom")

        with patch.dict(script.COMMANDS, {"pn-limit": failing}):
            code = script.main(["pn-limit", "--out", str(tmp_path / "out")])

        assert code == script.EXIT_RUNTIME

    def test_overrides(self, script):
        """Test that flags override the configuration."""
        args = script.parse_args(["simulate", "--seed", "7", "--shots", "12", "--protocol", "entangled"])

        config = script.resolve_config(args)

        assert config.master_seed == 7
        assert config.n_shots == 12
        assert config.protocol == "entangled"
