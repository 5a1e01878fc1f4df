import csv
import json

import pytest

from wedesign import studies
from wedesign.cli import EXIT_INVARIANT, EXIT_OK, EXIT_PARSE, main
from wedesign.config import config_to_dict, scenario_to_dict


@pytest.fixture
def trial_files(tmp_path):
    cfg = tmp_path / "trial2.json"
    cfg.write_text(json.dumps(config_to_dict(studies.trial2_config(rule="rule1", seed=42))))
    h1 = tmp_path / "h1.json"
    h1.write_text(json.dumps(scenario_to_dict(studies.TRIAL2_ALTERNATIVE)))
    h0 = tmp_path / "h0.json"
    h0.write_text(json.dumps(scenario_to_dict(studies.TRIAL2_NULL)))
    return cfg, h0, h1


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestSimulate:
    def test_writes_results(self, tmp_path, trial_files, capsys):
        cfg, _, h1 = trial_files
        out = tmp_path / "out"
        code = main([
            "simulate", "--config", str(cfg), "--scenario", str(h1),
            "--reps", "400", "--seed", "42", "--out", str(out),
        ])
        assert code == EXIT_OK
        rows = read_csv(out / "results.csv")
        assert len(rows) == 1
        assert float(rows[0]["ens"]) == pytest.approx(37.5, abs=1.5)
        assert (out / "results.json").exists()

    def test_missing_file_exit_code(self, tmp_path, capsys):
        code = main(["simulate", "--config", str(tmp_path / "nope.json"),
                     "--scenario", str(tmp_path / "alsono.json"), "--reps", "10"])
        assert code == EXIT_PARSE

    def test_invariant_violation_exit_code(self, tmp_path, trial_files):
        cfg, _, h1 = trial_files
        data = json.loads(cfg.read_text())
        data["gamma"] = [0.3, 0.75]  # off the simplex
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(data))
        code = main(["simulate", "--config", str(bad), "--scenario", str(h1), "--reps", "10"])
        assert code == EXIT_INVARIANT

    def test_byte_identical_output_for_same_seed(self, tmp_path, trial_files):
        cfg, _, h1 = trial_files
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            main([
                "simulate", "--config", str(cfg), "--scenario", str(h1),
                "--reps", "200", "--seed", "7", "--out", str(out), "--parallelism", "2",
            ])
            outs.append((out / "results.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_single_replication(self, tmp_path, trial_files):
        cfg, _, h1 = trial_files
        out = tmp_path / "single"
        code = main(["simulate", "--config", str(cfg), "--scenario", str(h1),
                     "--reps", "1", "--out", str(out)])
        assert code == EXIT_OK
        rows = read_csv(out / "results.csv")
        assert len(rows) == 1


class TestReproduce:
    def test_unknown_table_id(self, capsys):
        with pytest.raises(SystemExit):
            main(["reproduce", "table9"])

    def test_table5_spot_cells(self, tmp_path):
        # tiny budget: just verify the pipeline and output shape
        out = tmp_path / "t5"
        code = main(["reproduce", "table5", "--reps", "200", "--out", str(out), "--seed", "5"])
        assert code == EXIT_OK
        rows = read_csv(out / "table5.csv")
        assert {r["metric"] for r in rows} == {"term", "pcs"}
        assert len(rows) == 2 * 6 * 8


class TestCalibrations:
    def test_calibrate_cutoff(self, tmp_path, trial_files, capsys):
        cfg, h0, _ = trial_files
        out = tmp_path / "cut"
        code = main(["calibrate-cutoff", "--config", str(cfg), "--scenario", str(h0),
                     "--reps", "500", "--out", str(out)])
        assert code == EXIT_OK
        rows = read_csv(out / "cutoff.csv")
        assert 0.0 <= float(rows[0]["cutoff"]) <= 1.0

    def test_calibrate_prior_small_grid(self, tmp_path):
        out = tmp_path / "prior"
        code = main(["calibrate-prior", "--beta", "1", "--step", "0.3",
                     "--reps", "150", "--out", str(out), "--seed", "3"])
        assert code == EXIT_OK
        rows = read_csv(out / "prior_calibration.csv")
        assert len(rows) == 1 and rows[0]["selected"] == "True"

    def test_calibrate_safety_small_grid(self, tmp_path):
        out = tmp_path / "safety"
        code = main(["calibrate-safety", "--gamma-star", "0.45", "--r", "0.035",
                     "--reps", "150", "--out", str(out), "--seed", "3"])
        assert code == EXIT_OK
        rows = read_csv(out / "safety_calibration.csv")
        assert len(rows) == 1


class TestManifest:
    def test_run_with_manifest(self, tmp_path, trial_files):
        cfg, _, h1 = trial_files
        manifest = tmp_path / "manifest.json"
        manifest.write_text(json.dumps({
            "mode": "simulate",
            "config": str(cfg),
            "scenarios": [str(h1)],
            "reps": 100,
            "seed": 11,
            "out": str(tmp_path / "mout"),
        }))
        assert main(["run", "--manifest", str(manifest)]) == EXIT_OK
        assert (tmp_path / "mout" / "results.csv").exists()

    def test_flags_override_manifest(self, tmp_path, trial_files):
        cfg, _, h1 = trial_files
        manifest = tmp_path / "manifest.json"
        manifest.write_text(json.dumps({
            "mode": "simulate", "config": str(cfg), "scenarios": [str(h1)],
            "reps": 100, "out": str(tmp_path / "aout"),
        }))
        assert main(["run", "--manifest", str(manifest), "--out", str(tmp_path / "bout")]) == EXIT_OK
        assert (tmp_path / "bout" / "results.csv").exists()

    def test_missing_manifest(self, tmp_path):
        assert main(["run", "--manifest", str(tmp_path / "none.json")]) == EXIT_PARSE
