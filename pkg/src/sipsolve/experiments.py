"""Experiment runner: generate, solve, score, and write reports.

Each replicate derives train and evaluation seeds from the master seed, runs
every configured method on the same data, and contributes rows to the
delimited outputs.  The output directory receives per-replicate fitted
functions, a per-run results table, replicate summary statistics, a manifest
sufficient to reproduce every CSV byte-for-byte, and rendered figures.
"""

from __future__ import annotations

import concurrent.futures
import json
import platform
import time
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, figures
from .checks import run_checks
from .config import ConfigError, ExperimentConfig, SolverSettings
from .evaluation import (
    estimate_constants,
    excess_risk,
    kfold_cv,
    mse_function,
    replicate_stats,
    theorem_bound,
)
from .grids import DiscreteFn, make_uniform_grid, restrict
from .losses import LossKind
from .operators import Problem, deconv_problem, flr_problem
from .rng import derive_seed
from .solvers import (
    FixedInvSqrtN,
    InverseSqrt,
    SolverConfig,
    landweber,
    ml_sgd,
    sgd_sip,
)
from .synthgen import gen_deconv, gen_flr, gen_flr_classification


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list[Any]]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", newline="\n")


def _train_seed(master: int, r: int) -> int:
    return derive_seed(master, 2 * r)


def _eval_seed(master: int, r: int) -> int:
    return derive_seed(master, 2 * r + 1)


def _solve(problem: Problem, samples, method: str, settings: SolverSettings):
    f0 = DiscreteFn.zeros(problem.w_grid)
    if method == "landweber":
        if settings.iterations is None:
            raise ConfigError("solver.landweber.iterations: required")
        schedule = (InverseSqrt(settings.eta) if settings.schedule_kind == "invsqrt"
                    else FixedInvSqrtN(settings.eta, settings.iterations))
        return landweber(problem, samples, f0, settings.iterations, schedule)
    schedule = settings.schedule(len(samples))
    solver_config = SolverConfig(
        schedule=schedule,
        batch=settings.batch,
        learner=settings.learner if method == "mlsgd" else None,
        batch_iterations=settings.iterations if settings.batch else None,
    )
    if method == "mlsgd":
        return ml_sgd(problem, samples, f0, solver_config)
    return sgd_sip(problem, samples, f0, solver_config)


def _replicate_regression(config: ExperimentConfig, r: int) -> dict[str, Any]:
    """One replicate of an flr/flr-step/deconv run; returns rows and tables."""
    master = config.master_seed
    if config.experiment == "deconv":
        train, f_true = gen_deconv(config.generator_config(_train_seed(master, r)))
        evals, _ = gen_deconv(config.generator_config(_eval_seed(master, r)))
        gen = config.raw["generator"]
        coarse_n = round(20.0 / float(gen["obs_spacing"])) + 1
        problem = deconv_problem(
            LossKind.SQUARED, make_uniform_grid(-10.0, 10.0, coarse_n)
        )
    else:
        train, f_true, _ = gen_flr(config.generator_config(_train_seed(master, r)))
        eval_gen = config.generator_config(_eval_seed(master, r))
        eval_gen = type(eval_gen)(
            n_samples=config.eval_n, fine_n=eval_gen.fine_n, obs_n=eval_gen.obs_n,
            nsr=eval_gen.nsr, target=eval_gen.target, seed=eval_gen.seed,
        )
        evals, _, _ = gen_flr(eval_gen)
        problem = flr_problem(LossKind.SQUARED, f_true.grid)

    rows = []
    fits: dict[str, np.ndarray] = {}
    timings: dict[str, float] = {}
    for method in config.methods:
        settings = config.solver_settings(method)
        t0 = time.perf_counter()
        out = _solve(problem, train, method, settings)
        timings[method] = (time.perf_counter() - t0) * 1000.0
        f_hat_out = (restrict(out.f_hat, f_true.grid)
                     if out.f_hat.grid != f_true.grid else out.f_hat)
        mse = mse_function(f_hat_out, f_true)
        er = excess_risk(problem, out.f_hat, f_true, evals)
        if method == "landweber":
            schedule = (InverseSqrt(settings.eta)
                        if settings.schedule_kind == "invsqrt"
                        else FixedInvSqrtN(settings.eta, settings.iterations))
        else:
            schedule = settings.schedule(len(train))
        bound = theorem_bound(
            estimate_constants(problem, train, config.d_diameter, schedule)
        )
        rows.append([config.experiment, method, r, len(train), mse, er, bound])
        fits[method] = f_hat_out.values
    return {
        "replicate": r,
        "rows": rows,
        "fitted_grid": f_true.grid.points,
        "f_true": f_true.values,
        "fits": fits,
        "timings": timings,
    }


def _replicate_classify(config: ExperimentConfig, r: int) -> dict[str, Any]:
    """One replicate of flr-classify: k-fold CV plus a full-data fit."""
    master = config.master_seed
    samples, f_true = gen_flr_classification(
        config.generator_config(_train_seed(master, r))
    )
    problem = flr_problem(LossKind.LOGISTIC, f_true.grid)
    cv_rows = []
    fits: dict[str, np.ndarray] = {}
    timings: dict[str, float] = {}
    for method in config.methods:
        settings = config.solver_settings(method)
        solver_config = SolverConfig(
            schedule=settings.schedule(
                len(samples) - len(samples) // config.cv_folds
            ),
            batch=settings.batch,
            learner=settings.learner if method == "mlsgd" else None,
            batch_iterations=settings.iterations if settings.batch else None,
        )
        t0 = time.perf_counter()
        result = kfold_cv(problem, samples, config.cv_folds, solver_config,
                          seed=_eval_seed(master, r))
        for fold, (acc, kappa) in enumerate(result.fold_metrics):
            cv_rows.append([config.experiment, method, r, fold, acc, kappa])
        out = _solve(problem, samples, method, settings)
        timings[method] = (time.perf_counter() - t0) * 1000.0
        fits[method] = out.f_hat.values
    return {
        "replicate": r,
        "cv_rows": cv_rows,
        "fitted_grid": f_true.grid.points,
        "f_true": f_true.values,
        "fits": fits,
        "timings": timings,
    }


def _run_replicate(config: ExperimentConfig, r: int) -> dict[str, Any]:
    if config.experiment == "flr-classify":
        return _replicate_classify(config, r)
    return _replicate_regression(config, r)


def _manifest(config: ExperimentConfig, timings: dict[str, Any]) -> dict[str, Any]:
    return {
        "config": config.to_dict(),
        "replicate_seeds": [
            {
                "replicate": r,
                "train_seed": _train_seed(config.master_seed, r),
                "eval_seed": _eval_seed(config.master_seed, r),
            }
            for r in range(config.n_replicates)
        ] if config.experiment != "check" else [],
        "versions": {
            "sipsolve": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "timings": timings,
    }


def _summarize(values: list[float]) -> tuple[float, float]:
    if len(values) >= 2:
        stats = replicate_stats(values)
        return stats.mean, 2.0 * stats.sd
    return float(values[0]), 0.0


def run_experiment(config: ExperimentConfig) -> int:
    """Run the configured experiment; returns the process exit code."""
    out_dir = config.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    t_start = time.perf_counter()

    if config.experiment == "check":
        results = run_checks(config.check_sizes, seed=config.master_seed)
        _write_csv(
            out_dir / "checks_report.csv",
            ["check", "passed", "measured", "tolerance"],
            [[r.name, int(r.passed), r.measured, r.tolerance] for r in results],
        )
        manifest = _manifest(config, {"total_s": time.perf_counter() - t_start})
        (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
        return 0 if all(r.passed for r in results) else 1

    replicates = list(range(config.n_replicates))
    if config.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futures = {pool.submit(_run_replicate, config, r): r for r in replicates}
            outputs = [f.result() for f in futures]
    else:
        outputs = [_run_replicate(config, r) for r in replicates]
    outputs.sort(key=lambda o: o["replicate"])

    for out in outputs:
        header = ["w", "f_true"] + [f"f_hat_{m}" for m in config.methods]
        table = [
            [out["fitted_grid"][j], out["f_true"][j]]
            + [out["fits"][m][j] for m in config.methods]
            for j in range(len(out["fitted_grid"]))
        ]
        _write_csv(out_dir / f"fitted_r{out['replicate']}.csv", header, table)

    if config.experiment == "flr-classify":
        cv_rows = [row for out in outputs for row in out["cv_rows"]]
        _write_csv(out_dir / "cv.csv",
                   ["experiment", "method", "replicate", "fold", "accuracy", "kappa"],
                   cv_rows)
        summary_rows = []
        for method in config.methods:
            accs = [r[4] for r in cv_rows if r[1] == method]
            kappas = [r[5] for r in cv_rows if r[1] == method]
            acc_mean, acc_sd2 = _summarize(accs)
            kap_mean, kap_sd2 = _summarize(kappas)
            summary_rows.append([method, acc_mean, acc_sd2, kap_mean, kap_sd2])
        _write_csv(out_dir / "summary.csv",
                   ["method", "mean_accuracy", "two_sd_accuracy",
                    "mean_kappa", "two_sd_kappa"],
                   summary_rows)
        figures.render_cv_bars(
            [(r[1], r[3], r[4], r[5]) for r in cv_rows], out_dir / "cv.png"
        )
    else:
        rows = [row for out in outputs for row in out["rows"]]
        _write_csv(out_dir / "results.csv",
                   ["experiment", "method", "replicate", "n", "mse",
                    "excess_risk", "bound"],
                   rows)
        summary_rows = []
        mse_stats = {}
        for method in config.methods:
            mses = [r[4] for r in rows if r[1] == method]
            excesses = [r[5] for r in rows if r[1] == method]
            mse_mean, mse_sd2 = _summarize(mses)
            er_mean, er_sd2 = _summarize(excesses)
            summary_rows.append([method, mse_mean, mse_sd2, er_mean, er_sd2])
            mse_stats[method] = (mse_mean, mse_sd2)
        _write_csv(out_dir / "summary.csv",
                   ["method", "mean_mse", "two_sd_mse",
                    "mean_excess_risk", "two_sd_excess_risk"],
                   summary_rows)
        figures.render_mse_bars(mse_stats, out_dir / "mse.png")

    first = outputs[0]
    figures.render_fitted(first["fitted_grid"], first["f_true"], first["fits"],
                          out_dir / "fitted.png")

    timings = {
        "total_s": time.perf_counter() - t_start,
        "replicates": {str(o["replicate"]): o["timings"] for o in outputs},
    }
    manifest = _manifest(config, timings)
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return 0
