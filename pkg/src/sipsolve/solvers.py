"""Estimation procedures: streaming/batch SGD, its smoothed variant, Landweber.

The streaming solvers take one gradient step per observation and use each
observation exactly once, so the iteration count equals the sample size; the
returned estimate is the average of all post-update iterates.  The smoothed
variant fits a base learner to each gradient on the estimation grid before
stepping.  Landweber iteration is the deterministic full-batch baseline for
squared loss and returns its final iterate without averaging.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import learners as learners_mod
from .grids import DiscreteFn
from .learners import LearnerSpec
from .losses import LossKind
from .operators import Problem, Sample, empirical_adjoint, forward, stochastic_gradient


@dataclass(frozen=True)
class InverseSqrt:
    """Decaying steps ``eta / sqrt(i)``."""

    eta: float

    def __post_init__(self) -> None:
        if self.eta <= 0:
            raise ValueError("eta must be positive")


@dataclass(frozen=True)
class FixedInvSqrtN:
    """Constant steps ``eta / sqrt(n)`` for a run of length ``n``."""

    eta: float
    n: int

    def __post_init__(self) -> None:
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.n < 1:
            raise ValueError("n must be positive")


StepSchedule = InverseSqrt | FixedInvSqrtN


def step_size(schedule: StepSchedule, i: int) -> float:
    """Step size for iteration ``i`` (1-based)."""
    if isinstance(schedule, InverseSqrt):
        return schedule.eta / np.sqrt(i)
    return schedule.eta / np.sqrt(schedule.n)


@dataclass(frozen=True)
class SolverConfig:
    schedule: StepSchedule
    batch: bool = False
    learner: LearnerSpec | None = None
    record_trajectory: bool = False
    batch_iterations: int | None = None

    def __post_init__(self) -> None:
        if self.batch and self.batch_iterations is None:
            raise ValueError("batch mode needs an explicit iteration count")


@dataclass(frozen=True, eq=False)
class SolverOutput:
    f_hat: DiscreteFn
    final_iterate: DiscreteFn
    steps_used: np.ndarray
    trajectory: list[DiscreteFn] | None = None


def _run_updates(problem: Problem, samples, f0: DiscreteFn, config: SolverConfig,
                 gradient_fn) -> SolverOutput:
    """Shared iteration loop: step, accumulate the running average, record."""
    grid = problem.w_grid
    if f0.grid != grid:
        raise ValueError("initial guess must live on the problem grid")

    if config.batch:
        sample_list = list(samples)
        if not sample_list:
            raise ValueError("need at least one sample")
        n_iter = config.batch_iterations

        def step_inputs():
            for i in range(1, n_iter + 1):
                yield i, sample_list
    else:
        def step_inputs():
            i = 0
            for sample in samples:
                i += 1
                yield i, sample
    g = f0.values.copy()
    avg = np.zeros(grid.n)
    steps = []
    trajectory = [] if config.record_trajectory else None
    n_done = 0
    for i, data in step_inputs():
        current = DiscreteFn(grid, g)
        alpha = step_size(config.schedule, i)
        g = g - alpha * gradient_fn(current, data, i)
        avg += g
        steps.append(alpha)
        n_done += 1
        if trajectory is not None:
            trajectory.append(DiscreteFn(grid, g.copy()))
    if n_done == 0:
        raise ValueError("need at least one sample")
    return SolverOutput(
        f_hat=DiscreteFn(grid, avg / n_done),
        final_iterate=DiscreteFn(grid, g),
        steps_used=np.asarray(steps),
        trajectory=trajectory,
    )


def _mean_gradient(problem: Problem, f: DiscreteFn, samples: Sequence[Sample]) -> np.ndarray:
    acc = np.zeros(problem.w_grid.n)
    for sample in samples:
        acc += stochastic_gradient(problem, f, sample).values
    return acc / len(samples)


def sgd_sip(problem: Problem, samples, f0: DiscreteFn, config: SolverConfig) -> SolverOutput:
    """Averaged stochastic gradient descent on the estimation grid.

    Streaming mode (``batch=False``) consumes each sample once, in order;
    batch mode steps along the mean gradient over all samples for a
    configured number of iterations.
    """
    if config.learner is not None:
        raise ValueError("sgd_sip takes no learner; use ml_sgd")

    def gradient(f, data, _i):
        if config.batch:
            return _mean_gradient(problem, f, data)
        return stochastic_gradient(problem, f, data).values

    return _run_updates(problem, samples, f0, config, gradient)


def ml_sgd(problem: Problem, samples, f0: DiscreteFn, config: SolverConfig) -> SolverOutput:
    """SGD with each gradient replaced by a base-learner fit on the grid."""
    if config.learner is None:
        raise ValueError("ml_sgd needs a learner spec")
    grid = problem.w_grid

    def gradient(f, data, i):
        if config.batch:
            u = _mean_gradient(problem, f, data)
        else:
            u = stochastic_gradient(problem, f, data).values
        try:
            h = learners_mod.fit(config.learner, grid.points, u)
        except ValueError as exc:
            raise ValueError(f"learner fit failed at iteration {i}: {exc}") from exc
        return learners_mod.project_to_grid(h, grid).values

    return _run_updates(problem, samples, f0, config, gradient)


def landweber(problem: Problem, samples: Sequence[Sample], f0: DiscreteFn,
              n_iters: int, schedule: StepSchedule,
              record_trajectory: bool = False) -> SolverOutput:
    """Full-batch gradient iteration for squared loss; no iterate averaging."""
    if problem.loss is not LossKind.SQUARED:
        raise ValueError("landweber is defined for squared loss only")
    if n_iters < 1:
        raise ValueError("n_iters must be positive")
    sample_list = list(samples)
    if not sample_list:
        raise ValueError("need at least one sample")
    grid = problem.w_grid
    if f0.grid != grid:
        raise ValueError("initial guess must live on the problem grid")
    f = f0.values.copy()
    steps = []
    trajectory = [] if record_trajectory else None
    for k in range(1, n_iters + 1):
        current = DiscreteFn(grid, f)
        residuals = [(s.x, forward(problem, current, s.x) - s.y) for s in sample_list]
        direction = empirical_adjoint(problem, residuals)
        alpha = step_size(schedule, k)
        f = f - alpha * direction.values
        steps.append(alpha)
        if trajectory is not None:
            trajectory.append(DiscreteFn(grid, f.copy()))
    final = DiscreteFn(grid, f)
    return SolverOutput(
        f_hat=final,
        final_iterate=final,
        steps_used=np.asarray(steps),
        trajectory=trajectory,
    )
