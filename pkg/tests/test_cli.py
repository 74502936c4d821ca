import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from sipsolve import checks, operators
from sipsolve.cli import main
from sipsolve.config import ConfigError, apply_set_override, load_config
from sipsolve.experiments import run_experiment


SMALL_FLR = [
    "generator.n_samples=120",
    "generator.fine_n=200",
    "generator.obs_n=50",
    "n_replicates=2",
    "eval_n=300",
    "solver.landweber.iterations=10",
]


class TestConfig:
    def test_defaults_resolve(self):
        cfg = load_config("flr")
        assert cfg.methods == ["sgd", "mlsgd", "landweber"]
        assert cfg.n_replicates == 10
        assert cfg.generator_config(1).target.value == "sine"

    def test_step_variant_switches_target(self):
        cfg = load_config("flr-step")
        assert cfg.generator_config(1).target.value == "step"

    def test_set_override_types(self):
        doc = {"a": {"b": 1}}
        apply_set_override(doc, "a.b=2.5")
        apply_set_override(doc, "a.c=hello")
        apply_set_override(doc, 'methods=["sgd"]')
        assert doc == {"a": {"b": 2.5, "c": "hello"}, "methods": ["sgd"]}

    def test_set_requires_assignment(self):
        with pytest.raises(ConfigError, match="key=value"):
            apply_set_override({}, "novalue")

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError, match="unknown experiment"):
            load_config("nope")

    def test_empty_methods_rejected(self):
        with pytest.raises(ConfigError, match="nonempty"):
            load_config("flr", set_overrides=["methods=[]"])

    def test_unknown_method_rejected(self):
        with pytest.raises(ConfigError, match="unknown method"):
            load_config("flr", set_overrides=['methods=["adam"]'])

    def test_landweber_rejected_for_classification(self):
        with pytest.raises(ConfigError, match="landweber"):
            load_config("flr-classify",
                        set_overrides=['methods=["sgd","landweber"]'])

    def test_mlsgd_needs_learner(self):
        with pytest.raises(ConfigError, match="needs a learner"):
            load_config("flr", set_overrides=["solver.mlsgd.learner=none"])

    def test_config_file_overlay(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"n_replicates": 4, "generator": {"nsr": 0.1}}))
        cfg = load_config("flr", config_path=path)
        assert cfg.n_replicates == 4
        assert cfg.generator_config(0).nsr == 0.1
        assert cfg.generator_config(0).n_samples == 3000  # untouched default

    def test_bad_json_reports_position(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{bad json")
        with pytest.raises(ConfigError, match="line"):
            load_config("flr", config_path=path)

    def test_wrong_experiment_in_file(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"experiment": "deconv"}))
        with pytest.raises(ConfigError, match="config file is for"):
            load_config("flr", config_path=path)

    def test_zero_check_size_rejected(self):
        with pytest.raises(ConfigError, match="positive"):
            load_config("check", set_overrides=["check.unbias_m=0"])


class TestRunExperiment:
    def test_outputs_and_manifest_round_trip(self, tmp_path):
        cfg = load_config("flr", set_overrides=SMALL_FLR,
                          out_dir=str(tmp_path / "a"), seed=99)
        assert run_experiment(cfg) == 0
        out = tmp_path / "a"
        for name in ("results.csv", "summary.csv", "fitted_r0.csv",
                     "fitted_r1.csv", "manifest.json", "fitted.png", "mse.png"):
            assert (out / name).exists(), name
        manifests = list(out.glob("*manifest*"))
        assert len(manifests) == 1

        # rerun from the manifest into a fresh directory: identical CSVs
        cfg2 = load_config("flr", config_path=out / "manifest.json",
                           out_dir=str(tmp_path / "b"))
        assert run_experiment(cfg2) == 0
        for name in ("results.csv", "summary.csv", "fitted_r0.csv", "fitted_r1.csv"):
            a = hashlib.sha256((out / name).read_bytes()).hexdigest()
            b = hashlib.sha256((tmp_path / "b" / name).read_bytes()).hexdigest()
            assert a == b, name

    def test_summary_consistent_with_rows(self, tmp_path):
        cfg = load_config("flr", set_overrides=SMALL_FLR,
                          out_dir=str(tmp_path / "s"), seed=5)
        run_experiment(cfg)
        rows = (tmp_path / "s" / "results.csv").read_text().strip().split("\n")[1:]
        parsed = [r.split(",") for r in rows]
        summary = (tmp_path / "s" / "summary.csv").read_text().strip().split("\n")[1:]
        for line in summary:
            method, mean_mse, *_ = line.split(",")
            mses = [float(r[4]) for r in parsed if r[1] == method]
            assert float(mean_mse) == pytest.approx(np.mean(mses), abs=1e-12)

    def test_parallel_jobs_match_serial(self, tmp_path):
        serial = load_config("flr", set_overrides=SMALL_FLR,
                             out_dir=str(tmp_path / "ser"), seed=3, jobs=1)
        run_experiment(serial)
        parallel = load_config("flr", set_overrides=SMALL_FLR,
                               out_dir=str(tmp_path / "par"), seed=3, jobs=2)
        run_experiment(parallel)
        for name in ("results.csv", "fitted_r0.csv", "fitted_r1.csv"):
            assert (tmp_path / "ser" / name).read_bytes() == \
                (tmp_path / "par" / name).read_bytes()

    def test_classify_outputs(self, tmp_path):
        cfg = load_config(
            "flr-classify",
            set_overrides=["generator.n_samples=90", "generator.fine_n=100",
                           "generator.obs_n=50"],
            out_dir=str(tmp_path / "c"), seed=2,
        )
        assert run_experiment(cfg) == 0
        cv = (tmp_path / "c" / "cv.csv").read_text().strip().split("\n")
        assert cv[0] == "experiment,method,replicate,fold,accuracy,kappa"
        assert len(cv) == 1 + 2 * 3  # two methods, three folds
        assert (tmp_path / "c" / "cv.png").exists()

    def test_deconv_fitted_rows_match_fine_grid(self, tmp_path):
        cfg = load_config(
            "deconv",
            set_overrides=["n_replicates=1", "solver.landweber.iterations=20"],
            out_dir=str(tmp_path / "d"), seed=4,
        )
        assert run_experiment(cfg) == 0
        fitted = (tmp_path / "d" / "fitted_r0.csv").read_text().strip().split("\n")
        assert len(fitted) == 1 + 2001


class TestCliEntry:
    def test_exit_zero_on_success(self, tmp_path, capsys):
        rc = main(["flr", "--out", str(tmp_path / "run"), "--seed", "1",
                   "--replicates", "1"]
                  + [f"--set={s}" for s in SMALL_FLR if "n_replicates" not in s])
        assert rc == 0

    def test_exit_two_on_config_error(self, tmp_path, capsys):
        rc = main(["flr", "--out", str(tmp_path), "--set", "methods=[]"])
        assert rc == 2
        assert "config error" in capsys.readouterr().err

    def test_exit_two_on_zero_size_check(self, tmp_path, capsys):
        rc = main(["check", "--out", str(tmp_path), "--set", "check.unbias_m=0"])
        assert rc == 2

    def test_exit_one_on_failed_check(self, tmp_path, capsys):
        rc = main([
            "check", "--out", str(tmp_path / "chk"), "--seed", "11",
            "--set", "check.adjoint_triples=2",
            "--set", "check.unbias_m=200",
            "--set", "check.unbias_oracle_m=400",
            "--set", "check.dd_samples=100",
            "--set", "check.dd_directions=2",
            "--set", "check.bound_replicates=2",
            "--set", "check.bound_n=200",
            "--set", "check.bound_eval_n=200",
        ])
        assert rc == 1
        out = capsys.readouterr().out
        assert "FAIL" in out and "gradient-unbiasedness" in out


class TestCheckSuite:
    def test_small_sizes_pass_except_unbiasedness_scale(self, capsys):
        result = checks.check_adjoint_identity(n_triples=3, seed=0)
        assert result.passed

    def test_adjoint_mutation_detected(self, monkeypatch):
        """A sign flip on the adjoint side must break the identity check.

        (Flipping the shared kernel row would cancel out of both sides, so
        the mutation targets the adjoint aggregation alone.)
        """
        from sipsolve.grids import DiscreteFn

        original = operators.empirical_adjoint

        def flipped(problem, residuals):
            out = original(problem, residuals)
            return DiscreteFn(out.grid, -out.values)

        monkeypatch.setattr(operators, "empirical_adjoint", flipped)
        result = checks.check_adjoint_identity(n_triples=3, seed=0)
        assert not result.passed

    def test_zero_sample_unbiasedness_is_usage_error(self):
        with pytest.raises(ConfigError):
            checks.check_unbiasedness(m=0, oracle_m=10)
