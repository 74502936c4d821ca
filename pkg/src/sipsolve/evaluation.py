"""Metrics, Monte Carlo oracles, and the excess-risk guarantee calculator.

This module is the verification spine: it provides the brute-force gradient
oracle used to test unbiasedness of the single-sample gradients, the
finite-difference cross-check of risk derivatives, and the finite-sample
excess-risk bound with its constants estimated from data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grids import DiscreteFn, inner_product, l2_norm, restrict
from .losses import loss_value
from .operators import Problem, Sample, empirical_adjoint, forward, stochastic_gradient
from .rng import make_rng
from .solvers import SolverConfig, StepSchedule, ml_sgd, sgd_sip, step_size


def mse_function(f_hat: DiscreteFn, f_true: DiscreteFn) -> float:
    """Plain grid-point mean of squared differences (not quadrature-weighted)."""
    if f_hat.grid != f_true.grid:
        raise ValueError("grid mismatch; restrict to a common grid first")
    diff = f_hat.values - f_true.values
    return float(np.mean(diff * diff))


def empirical_risk(problem: Problem, f: DiscreteFn, samples: Sequence[Sample]) -> float:
    """Sample-mean loss of the forward predictions."""
    if len(samples) == 0:
        raise ValueError("need at least one sample")
    total = 0.0
    for s in samples:
        total += loss_value(problem.loss, s.y, forward(problem, f, s.x))
    return total / len(samples)


def excess_risk(problem: Problem, f_hat: DiscreteFn, f_true: DiscreteFn,
                eval_samples: Sequence[Sample]) -> float:
    """Empirical risk gap to the truth on held-out samples.

    Slightly negative values are possible through Monte Carlo error.  When
    ``f_true`` lives on a different grid it is resampled onto the problem
    grid first.
    """
    if f_true.grid != problem.w_grid:
        f_true = restrict(f_true, problem.w_grid)
    return (empirical_risk(problem, f_hat, eval_samples)
            - empirical_risk(problem, f_true, eval_samples))


def gradient_oracle(problem: Problem, f: DiscreteFn,
                    mc_samples: Sequence[Sample]) -> DiscreteFn:
    """Brute-force Monte Carlo risk gradient: mean of per-sample gradients."""
    if len(mc_samples) == 0:
        raise ValueError("need at least one sample")
    acc = np.zeros(problem.w_grid.n)
    for s in mc_samples:
        acc += stochastic_gradient(problem, f, s).values
    return DiscreteFn(problem.w_grid, acc / len(mc_samples))


def directional_derivative_check(problem: Problem, f: DiscreteFn, g: DiscreteFn,
                                 samples: Sequence[Sample],
                                 delta: float) -> tuple[float, float]:
    """Analytic vs central-difference directional derivative of the risk.

    Both sides use the same fixed sample set: the analytic value is the
    quadrature inner product of the Monte Carlo gradient with ``g``; the
    numeric value is the symmetric difference quotient of the empirical risk
    along ``g``.
    """
    analytic = inner_product(gradient_oracle(problem, f, samples), g)
    up = DiscreteFn(f.grid, f.values + delta * g.values)
    down = DiscreteFn(f.grid, f.values - delta * g.values)
    numeric = (empirical_risk(problem, up, samples)
               - empirical_risk(problem, down, samples)) / (2.0 * delta)
    return analytic, numeric


@dataclass(frozen=True)
class BoundInputs:
    """Constants entering the finite-sample excess-risk guarantee."""

    D: float        # diameter of the search ball
    C: float        # sup over covariates of the squared adjoint-kernel norm
    EY2: float      # mean squared response
    opnorm2: float  # squared operator norm estimate
    n: int
    schedule: StepSchedule

    def __post_init__(self) -> None:
        for name in ("D", "C", "EY2", "opnorm2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.n < 1:
            raise ValueError("n must be positive")


def theorem_bound(inputs: BoundInputs) -> float:
    """Expected excess-risk guarantee for the averaged streaming solver.

    ``D^2 / (2 n alpha_n) + M / n * sum_i alpha_i`` with
    ``M = C * (EY2 + opnorm2 * D^2)``; the step sum is computed by explicit
    summation.
    """
    alphas = np.array([step_size(inputs.schedule, i) for i in range(1, inputs.n + 1)])
    m_const = inputs.C * (inputs.EY2 + inputs.opnorm2 * inputs.D**2)
    return (inputs.D**2 / (2.0 * inputs.n * alphas[-1])
            + m_const / inputs.n * float(np.sum(alphas)))


def estimate_constants(problem: Problem, samples: Sequence[Sample], d_diameter: float,
                       schedule: StepSchedule, power_iters: int = 20) -> BoundInputs:
    """Estimate the bound constants from data.

    The kernel constant is the max over observed covariates of the quadrature
    norm of the adjoint row; the squared operator norm comes from power
    iteration on the empirical normal operator
    ``f -> mean_i Phi(x_i, .) * A[f](x_i)``.
    """
    if len(samples) == 0:
        raise ValueError("need at least one sample")
    from .operators import adjoint_row

    spacing = problem.w_grid.spacing
    c_max = 0.0
    for s in samples:
        row = adjoint_row(problem, s.x)
        c_max = max(c_max, spacing * float(row[:-1] @ row[:-1]))
    ey2 = float(np.mean([s.y**2 for s in samples]))

    v = DiscreteFn(problem.w_grid, np.ones(problem.w_grid.n))
    norm = l2_norm(v)
    v = DiscreteFn(problem.w_grid, v.values / norm)
    lam = 0.0
    for _ in range(power_iters):
        tv = empirical_adjoint(
            problem, [(s.x, forward(problem, v, s.x)) for s in samples]
        )
        lam = inner_product(v, tv)
        tv_norm = l2_norm(tv)
        if tv_norm == 0.0:
            lam = 0.0
            break
        v = DiscreteFn(problem.w_grid, tv.values / tv_norm)
    return BoundInputs(D=d_diameter, C=c_max, EY2=ey2, opnorm2=max(lam, 0.0),
                       n=len(samples), schedule=schedule)


@dataclass(frozen=True)
class ReplicateStats:
    mean: float
    sd: float
    n_reps: int


def replicate_stats(values) -> ReplicateStats:
    """Sample mean and standard deviation (n-1 denominator) of replicates."""
    vals = np.asarray(values, dtype=np.float64)
    if vals.size < 2:
        raise ValueError("need at least two values")
    return ReplicateStats(float(np.mean(vals)), float(np.std(vals, ddof=1)), vals.size)


def classification_metrics(predictions, labels) -> tuple[float, float]:
    """Accuracy and Cohen's kappa for +/-1 predictions against +/-1 labels."""
    pred = np.asarray(predictions, dtype=np.float64)
    lab = np.asarray(labels, dtype=np.float64)
    if pred.shape != lab.shape:
        raise ValueError("predictions and labels must have equal length")
    for arr, name in ((pred, "predictions"), (lab, "labels")):
        if not np.all(np.isin(arr, (-1.0, 1.0))):
            raise ValueError(f"{name} must be -1 or +1")
    p_obs = float(np.mean(pred == lab))
    p_pred = float(np.mean(pred == 1.0))
    p_lab = float(np.mean(lab == 1.0))
    p_exp = p_pred * p_lab + (1.0 - p_pred) * (1.0 - p_lab)
    kappa = 0.0 if p_exp == 1.0 else (p_obs - p_exp) / (1.0 - p_exp)
    return p_obs, kappa


def predict_labels(problem: Problem, f: DiscreteFn, samples: Sequence[Sample]) -> np.ndarray:
    """Sign of the forward value, with ties sent to +1."""
    return np.array([1.0 if forward(problem, f, s.x) >= 0.0 else -1.0 for s in samples])


@dataclass(frozen=True)
class CvResult:
    fold_metrics: list[tuple[float, float]]  # (accuracy, kappa) per fold
    mean_accuracy: float
    mean_kappa: float


def kfold_cv(problem: Problem, samples: Sequence[Sample], k: int,
             config: SolverConfig, seed: int) -> CvResult:
    """Seeded-shuffle contiguous k-fold cross-validation of a solver config.

    Trains on k-1 folds from a zero start and scores sign predictions on the
    held-out fold.
    """
    if k < 2 or k > len(samples):
        raise ValueError(f"invalid k={k} for {len(samples)} samples")
    rng = make_rng(seed)
    order = rng.permutation(len(samples))
    folds = np.array_split(order, k)
    metrics = []
    for held in range(k):
        train_idx = np.concatenate([folds[j] for j in range(k) if j != held])
        train = [samples[i] for i in train_idx]
        test = [samples[i] for i in folds[held]]
        f0 = DiscreteFn.zeros(problem.w_grid)
        if config.learner is None:
            out = sgd_sip(problem, train, f0, config)
        else:
            out = ml_sgd(problem, train, f0, config)
        preds = predict_labels(problem, out.f_hat, test)
        labels = np.array([s.y for s in test])
        metrics.append(classification_metrics(preds, labels))
    return CvResult(
        fold_metrics=metrics,
        mean_accuracy=float(np.mean([m[0] for m in metrics])),
        mean_kappa=float(np.mean([m[1] for m in metrics])),
    )
