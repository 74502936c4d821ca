"""Forward operators, adjoint kernels, and single-sample risk gradients.

Two linear operator families are supported:

* ``FLR`` (scalar-on-function regression): ``A[f](x) = integral of x(s) f(s)``
  over ``[0, T]``; the covariate is a path sampled on its own grid and the
  adjoint kernel is the path itself, ``Phi(x, s) = x(s)``.
* ``DECONV`` (convolution with a Heaviside kernel): ``A[f](x) = integral of
  k(x - w) f(w)`` with ``k(z) = 1 for z >= 0``; the covariate is a scalar
  location and ``Phi(x, w) = k(x - w)``.

For either family the per-sample gradient of the population risk at ``f`` is
``u(w) = Phi(x, w) * d/dyhat loss(y, A[f](x))``, an unbiased estimate of the
risk gradient when ``(x, y)`` is drawn from the data distribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Union

import numpy as np

from .grids import DiscreteFn, Grid, evaluate_interp
from .losses import LossKind, loss_grad2

Covariate = Union[DiscreteFn, float]


class ProblemKind(Enum):
    FLR = "flr"
    DECONV = "deconv"


@dataclass(frozen=True)
class Sample:
    """One observation: a path or scalar covariate and a scalar response."""

    x: Covariate
    y: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.y):
            raise ValueError(f"response must be finite, got {self.y}")


@dataclass(frozen=True)
class Problem:
    """An operator instance: kind, loss, and the estimation grid for f."""

    kind: ProblemKind
    loss: LossKind
    w_grid: Grid

    def __post_init__(self) -> None:
        if self.kind is ProblemKind.FLR and self.w_grid.lo != 0.0:
            raise ValueError("FLR estimation grid must start at 0")


def flr_problem(loss: LossKind, w_grid: Grid) -> Problem:
    return Problem(ProblemKind.FLR, loss, w_grid)


def deconv_problem(loss: LossKind, w_grid: Grid) -> Problem:
    return Problem(ProblemKind.DECONV, loss, w_grid)


def _path_covariate(problem: Problem, x: Covariate) -> DiscreteFn:
    if not isinstance(x, DiscreteFn):
        raise ValueError("FLR problems need a path covariate")
    if (x.grid.lo, x.grid.hi) != (problem.w_grid.lo, problem.w_grid.hi):
        raise ValueError(
            f"path domain [{x.grid.lo}, {x.grid.hi}] does not match "
            f"estimation domain [{problem.w_grid.lo}, {problem.w_grid.hi}]"
        )
    return x


def _point_covariate(problem: Problem, x: Covariate) -> float:
    if isinstance(x, DiscreteFn):
        raise ValueError("deconvolution problems need a scalar covariate")
    x = float(x)
    if x < problem.w_grid.lo or x > problem.w_grid.hi:
        raise ValueError(f"covariate {x} outside [{problem.w_grid.lo}, {problem.w_grid.hi}]")
    return x


def adjoint_row(problem: Problem, x: Covariate) -> np.ndarray:
    """Values of the adjoint kernel ``Phi(x, w_j)`` on the whole grid."""
    pts = problem.w_grid.points
    if problem.kind is ProblemKind.FLR:
        path = _path_covariate(problem, x)
        if path.grid == problem.w_grid:
            return path.values
        return np.interp(pts, path.grid.points, path.values)
    x = _point_covariate(problem, x)
    return (pts <= x).astype(np.float64)


def adjoint_kernel(problem: Problem, x: Covariate, w: float) -> float:
    """Adjoint kernel ``Phi(x, w)`` at a single location ``w``."""
    if w < problem.w_grid.lo or w > problem.w_grid.hi:
        raise ValueError(f"point {w} outside estimation domain")
    if problem.kind is ProblemKind.FLR:
        return evaluate_interp(_path_covariate(problem, x), w)
    return 1.0 if _point_covariate(problem, x) >= w else 0.0


def forward(problem: Problem, f: DiscreteFn, x: Covariate) -> float:
    """Apply the operator: left-Riemann quadrature of the defining integral."""
    if f.grid != problem.w_grid:
        raise ValueError("f must live on the problem's estimation grid")
    row = adjoint_row(problem, x)
    return problem.w_grid.spacing * float(row[:-1] @ f.values[:-1])


def stochastic_gradient(problem: Problem, f: DiscreteFn, sample: Sample) -> DiscreteFn:
    """Single-sample unbiased gradient of the population risk at ``f``."""
    row = adjoint_row(problem, sample.x)
    af = problem.w_grid.spacing * float(row[:-1] @ f.values[:-1])
    resid = loss_grad2(problem.loss, sample.y, af)
    return DiscreteFn(problem.w_grid, row * resid)


def empirical_adjoint(
    problem: Problem, residuals: Sequence[tuple[Covariate, float]] | Iterable
) -> DiscreteFn:
    """Sample-mean adjoint: ``g(w_j) = mean_i Phi(x_i, w_j) * h_i``.

    This is the plug-in version of the population adjoint, used by the
    full-batch solvers and the adjoint-identity check.
    """
    acc = np.zeros(problem.w_grid.n)
    m = 0
    for x, h in residuals:
        acc += adjoint_row(problem, x) * h
        m += 1
    if m == 0:
        raise ValueError("empirical adjoint needs at least one residual")
    return DiscreteFn(problem.w_grid, acc / m)
