"""Command-line entry points, exit codes, cross-mode agreement."""

import filecmp
import json
from pathlib import Path

import pytest

from isarpose.cli import main

SCENARIO = {
    "duration": 30.0,
    "frame_interval": 0.5,
    "integration_time": 0.5,
    "phi0_deg": 45.0,
    "theta0_deg": 30.0,
    "steady_aspect_rate_dps": 0.3,
    "aspect_osc": {"amplitude_deg": 1.0, "period_s": 12.0},
    "tilt_osc": {"amplitude_deg": 1.0, "period_s": 10.0},
    "noise": {"sigma_r": 0.2, "sigma_f": 0.03, "sigma_a": 0.02},
    "seed": 11,
    "ship": {"loa": 120.0},
}

ANALYSIS_FILES = ("covariances.csv", "angles.csv", "consistency.csv",
                  "badfit.csv", "focus.csv", "classes.csv", "length.csv")


def _write_config(tmp_path, obj, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture(scope="module")
def sim_dir(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    out = tmp / "sim"
    code = main(["simulate", "--config", _write_config(tmp, SCENARIO),
                 "--out", str(out)])
    assert code == 0
    return out


class TestSimulate:
    def test_outputs_written(self, sim_dir):
        names = {p.name for p in sim_dir.iterdir()}
        assert {"dwell.csv", "run_report.json", *ANALYSIS_FILES} <= names
        report = json.loads((sim_dir / "run_report.json").read_text())
        assert report["mode"] == "simulate"
        assert report["n_frames"] == 60
        assert set(report["manifest"]) == names

    def test_seed_override_changes_dwell(self, sim_dir, tmp_path):
        out = tmp_path / "seeded"
        code = main(["simulate", "--config", _write_config(tmp_path, SCENARIO),
                     "--out", str(out), "--seed", "12"])
        assert code == 0
        assert (out / "dwell.csv").read_text() \
            != (sim_dir / "dwell.csv").read_text()

    def test_missing_scenario_key_is_config_error(self, tmp_path):
        broken = {k: v for k, v in SCENARIO.items() if k != "duration"}
        code = main(["simulate", "--config", _write_config(tmp_path, broken),
                     "--out", str(tmp_path / "out")])
        assert code == 2

    def test_unreadable_config_is_config_error(self, tmp_path):
        code = main(["simulate", "--config", str(tmp_path / "absent.json"),
                     "--out", str(tmp_path / "out")])
        assert code == 2

    def test_malformed_json_is_config_error(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        code = main(["simulate", "--config", str(path),
                     "--out", str(tmp_path / "out")])
        assert code == 2

    def test_failed_run_leaves_no_partial_outputs(self, tmp_path):
        # six frames cannot support the estimator; the run must fail
        # without leaving a half-written output directory behind
        short = dict(SCENARIO, duration=3.0)
        out = tmp_path / "partial"
        code = main(["simulate", "--config", _write_config(tmp_path, short),
                     "--out", str(out)])
        assert code == 4
        assert not out.exists() or not any(out.iterdir())


class TestAnalyze:
    def test_reproduces_simulate_analysis(self, sim_dir, tmp_path):
        out = tmp_path / "an"
        code = main(["analyze", "--input", str(sim_dir / "dwell.csv"),
                     "--out", str(out)])
        assert code == 0
        match, mismatch, errors = filecmp.cmpfiles(
            sim_dir, out, ANALYSIS_FILES, shallow=False)
        assert not mismatch and not errors
        sim_report = json.loads((sim_dir / "run_report.json").read_text())
        an_report = json.loads((out / "run_report.json").read_text())
        for key in ("n_frames", "angle_summary", "class_counts", "loa",
                    "badfit_count"):
            assert an_report[key] == sim_report[key]
        assert an_report["mode"] == "analyze"

    def test_missing_input_is_data_error(self, tmp_path):
        code = main(["analyze", "--input", str(tmp_path / "absent.csv"),
                     "--out", str(tmp_path / "out")])
        assert code == 3

    def test_corrupt_dwell_is_data_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("garbage\n")
        code = main(["analyze", "--input", str(bad),
                     "--out", str(tmp_path / "out")])
        assert code == 3

    def test_noise_override_validated(self, sim_dir, tmp_path):
        cfg = _write_config(tmp_path, {"noise_override": [0.1, 0.2]},
                            name="overrides.json")
        code = main(["analyze", "--input", str(sim_dir / "dwell.csv"),
                     "--out", str(tmp_path / "out"), "--config", cfg])
        assert code == 2


class TestSelftest:
    def test_list_names_without_running(self, capsys):
        assert main(["selftest", "--list"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 10
        assert all(" " not in name for name in lines)


def test_verb_is_required():
    with pytest.raises(SystemExit):
        main([])
