"""Self-contained numerical checks of the solver stack's core identities.

Each check builds synthetic data, measures a quantity against a tolerance,
and reports pass/fail: the discrete adjoint identity, unbiasedness of the
single-sample gradients against a brute-force Monte Carlo oracle, agreement
of analytic and finite-difference risk derivatives, and dominance of the
excess-risk guarantee over measured excess risk.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from . import operators
from .config import ConfigError
from .evaluation import (
    directional_derivative_check,
    estimate_constants,
    excess_risk,
    gradient_oracle,
    theorem_bound,
)
from .grids import DiscreteFn, inner_product, l2_norm, make_uniform_grid
from .losses import LossKind
from .operators import deconv_problem, flr_problem, forward
from .rng import derive_seed, make_rng
from .solvers import FixedInvSqrtN, SolverConfig, sgd_sip
from .synthgen import FlrGenConfig, gen_flr


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return (f"{status}  {self.name}: measured {self.measured:.3e} "
                f"vs tolerance {self.tolerance:.3e}{extra}")


def _smooth_fn(grid, rng) -> DiscreteFn:
    w = grid.points
    coef = rng.normal(size=4)
    span = grid.hi - grid.lo
    vals = sum(c * np.sin((k + 1) * np.pi * (w - grid.lo) / span)
               for k, c in enumerate(coef))
    return DiscreteFn(grid, vals)


def check_adjoint_identity(n_triples: int = 50, seed: int = 20260810) -> CheckResult:
    """Discrete operator/adjoint symmetry on random functions and samples."""
    if n_triples < 1:
        raise ConfigError("check.adjoint_triples: need at least one triple")
    rng = make_rng(seed)
    flr_grid = make_uniform_grid(0.0, 1.0, 400)
    obs_grid = make_uniform_grid(0.0, 1.0, 97)
    dec_grid = make_uniform_grid(-10.0, 10.0, 201)
    worst = 0.0
    for kind in ("flr", "deconv"):
        problem = (flr_problem(LossKind.SQUARED, flr_grid) if kind == "flr"
                   else deconv_problem(LossKind.SQUARED, dec_grid))
        for _ in range(n_triples):
            f = _smooth_fn(problem.w_grid, rng)
            m = 20
            if kind == "flr":
                xs = [DiscreteFn(obs_grid, np.concatenate(
                    [[0.0], np.cumsum(rng.normal(size=obs_grid.n - 1)
                                      * np.sqrt(obs_grid.spacing))]))
                      for _ in range(m)]
            else:
                xs = list(rng.uniform(-10.0, 10.0, size=m))
            hs = rng.normal(size=m)
            lhs = float(np.mean([forward(problem, f, x) * h
                                 for x, h in zip(xs, hs)]))
            rhs = inner_product(
                f, operators.empirical_adjoint(problem, list(zip(xs, hs)))
            )
            scale = max(abs(lhs), abs(rhs), 1e-12)
            worst = max(worst, abs(lhs - rhs) / scale)
    return CheckResult("adjoint-identity", worst < 1e-10, worst, 1e-10,
                       f"{n_triples} triples per operator kind")


def check_unbiasedness(m: int = 50000, oracle_m: int = 500000,
                       seed: int = 20260810) -> CheckResult:
    """Mean of m single-sample gradients vs a larger Monte Carlo oracle."""
    if m < 1 or oracle_m < 1:
        raise ConfigError("check.unbias_m / unbias_oracle_m: need positive sizes")
    grid = make_uniform_grid(0.0, 1.0, 1000)
    problem = flr_problem(LossKind.SQUARED, grid)
    f0 = DiscreteFn.zeros(grid)

    def mc_gradient(size: int, stream: int) -> DiscreteFn:
        # chunked generation keeps memory flat; equal chunks average exactly
        chunk = 50000
        acc = np.zeros(grid.n)
        done = 0
        index = 0
        while done < size:
            take = min(chunk, size - done)
            cfg = FlrGenConfig(n_samples=take, seed=derive_seed(seed, stream * 1000 + index))
            samples, _, _ = gen_flr(cfg)
            acc += gradient_oracle(problem, f0, samples).values * take
            done += take
            index += 1
        return DiscreteFn(grid, acc / size)

    oracle = mc_gradient(oracle_m, stream=1)
    estimate = mc_gradient(m, stream=2)
    diff = DiscreteFn(grid, estimate.values - oracle.values)
    rel = l2_norm(diff) / l2_norm(oracle)
    return CheckResult("gradient-unbiasedness", rel < 0.02, rel, 0.02,
                       f"m={m} vs oracle {oracle_m}")


def check_directional_derivative(n_samples: int = 5000, n_directions: int = 10,
                                 delta: float = 1e-4,
                                 seed: int = 20260810) -> CheckResult:
    """Analytic vs central-difference directional derivatives, both losses."""
    if n_samples < 1 or n_directions < 1:
        raise ConfigError("check.dd_samples / dd_directions: need positive sizes")
    grid = make_uniform_grid(0.0, 1.0, 500)
    worst = 0.0
    for loss in (LossKind.SQUARED, LossKind.LOGISTIC):
        problem = flr_problem(loss, grid)
        cfg = FlrGenConfig(n_samples=n_samples, fine_n=500, obs_n=100,
                           seed=derive_seed(seed, 5))
        if loss is LossKind.SQUARED:
            samples, _, _ = gen_flr(cfg)
        else:
            from .synthgen import gen_flr_classification

            samples, _ = gen_flr_classification(cfg)
        rng = make_rng(derive_seed(seed, 6))
        f = _smooth_fn(grid, rng)
        for _ in range(n_directions):
            g = _smooth_fn(grid, rng)
            analytic, numeric = directional_derivative_check(
                problem, f, g, samples, delta
            )
            rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-12)
            worst = max(worst, rel)
    return CheckResult("directional-derivative", worst < 1e-5, worst, 1e-5,
                       f"{n_directions} directions x 2 losses, {n_samples} samples")


def check_bound_dominance(replicates: int = 20, n: int = 1000, eta: float = 20.0,
                          eval_n: int = 20000, d: float = 2.0,
                          seed: int = 20260810) -> CheckResult:
    """Mean measured excess risk must not exceed the computed guarantee."""
    if replicates < 1 or n < 1 or eval_n < 1:
        raise ConfigError("check.bound_*: need positive sizes")
    grid = make_uniform_grid(0.0, 1.0, 1000)
    problem = flr_problem(LossKind.SQUARED, grid)
    schedule = FixedInvSqrtN(eta, n)
    excesses = []
    bounds = []
    for r in range(replicates):
        train, f_true, _ = gen_flr(FlrGenConfig(n_samples=n, seed=derive_seed(seed, 2 * r)))
        evals, _, _ = gen_flr(FlrGenConfig(n_samples=eval_n, seed=derive_seed(seed, 2 * r + 1)))
        out = sgd_sip(problem, train, DiscreteFn.zeros(grid),
                      SolverConfig(schedule=schedule))
        excesses.append(excess_risk(problem, out.f_hat, f_true, evals))
        bounds.append(theorem_bound(estimate_constants(problem, train, d, schedule)))
    mean_excess = float(np.mean(excesses))
    min_bound = float(np.min(bounds))
    return CheckResult("bound-dominance", mean_excess <= min_bound, mean_excess,
                       min_bound, f"{replicates} replicates at n={n}")


def run_checks(sizes: dict[str, Any], seed: int = 20260810) -> list[CheckResult]:
    """Run the full oracle suite with the given sizes; prints one line each."""
    results = [
        check_adjoint_identity(int(sizes.get("adjoint_triples", 50)), seed),
        check_unbiasedness(int(sizes.get("unbias_m", 50000)),
                           int(sizes.get("unbias_oracle_m", 500000)), seed),
        check_directional_derivative(int(sizes.get("dd_samples", 5000)),
                                     int(sizes.get("dd_directions", 10)),
                                     float(sizes.get("dd_delta", 1e-4)), seed),
        check_bound_dominance(int(sizes.get("bound_replicates", 20)),
                              int(sizes.get("bound_n", 1000)),
                              float(sizes.get("bound_eta", 20.0)),
                              int(sizes.get("bound_eval_n", 20000)),
                              float(sizes.get("bound_d", 2.0)), seed),
    ]
    for result in results:
        print(result.line())
    return results
