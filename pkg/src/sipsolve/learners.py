"""Base learners that smooth a gridded gradient by least squares.

The machine-learning-smoothed solver replaces each raw gradient (known only
at the grid points) with a fitted function from a small hypothesis class:
cubic B-spline regression with a fixed basis dimension, or a CART-style
regression tree grown to a leaf budget.  Fits are exact least squares over
the class, and fitted learners evaluate anywhere in the training interval
(extrapolation clamps to the boundary).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import BSpline

from .grids import DiscreteFn, Grid


@dataclass(frozen=True)
class SplineSpec:
    """Cubic B-spline basis of dimension ``df`` (so ``df - 4`` interior knots)."""

    df: int

    def __post_init__(self) -> None:
        if self.df < 4:
            raise ValueError(f"spline df must be >= 4, got {self.df}")


@dataclass(frozen=True)
class TreeSpec:
    """Regression tree grown greedily to at most ``max_leaves`` leaves."""

    max_leaves: int

    def __post_init__(self) -> None:
        if self.max_leaves < 1:
            raise ValueError(f"max_leaves must be >= 1, got {self.max_leaves}")


LearnerSpec = SplineSpec | TreeSpec


def parse_learner(text: str) -> LearnerSpec | None:
    """Parse ``"spline:df=10"``, ``"tree:leaves=30"``, or ``"none"``."""
    text = text.strip().lower()
    if text == "none":
        return None
    kind, _, arg = text.partition(":")
    key, _, value = arg.partition("=")
    try:
        if kind == "spline" and key == "df":
            return SplineSpec(int(value))
        if kind == "tree" and key == "leaves":
            return TreeSpec(int(value))
    except ValueError as exc:
        raise ValueError(f"bad learner spec {text!r}: {exc}") from None
    raise ValueError(
        f"bad learner spec {text!r}; expected 'spline:df=N', 'tree:leaves=N' or 'none'"
    )


def learner_to_string(spec: LearnerSpec | None) -> str:
    if spec is None:
        return "none"
    if isinstance(spec, SplineSpec):
        return f"spline:df={spec.df}"
    return f"tree:leaves={spec.max_leaves}"


@dataclass(frozen=True)
class ZeroFit:
    """The zero function."""

    def predict_many(self, w: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(w, dtype=np.float64))


@dataclass(frozen=True)
class ConstantFit:
    """Constant prediction, used when the training values are all equal."""

    value: float

    def predict_many(self, w: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(w, dtype=np.float64), self.value)


@dataclass(frozen=True, eq=False)
class SplineFit:
    """Least-squares cubic B-spline; ``knots`` is the full padded knot vector."""

    knots: np.ndarray
    coefficients: np.ndarray

    @cached_property
    def _bspline(self) -> BSpline:
        return BSpline(self.knots, self.coefficients, 3, extrapolate=False)

    def predict_many(self, w: np.ndarray) -> np.ndarray:
        w = np.clip(np.asarray(w, dtype=np.float64), self.knots[0], self.knots[-1])
        return self._bspline(w)


@dataclass(frozen=True, eq=False)
class TreeFit:
    """Piecewise-constant tree; region of ``w`` is left of a split when w < s."""

    splits: np.ndarray
    leaf_values: np.ndarray

    def predict_many(self, w: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.splits, np.asarray(w, dtype=np.float64), side="right")
        return self.leaf_values[idx]


FittedLearner = ZeroFit | ConstantFit | SplineFit | TreeFit


def _check_inputs(capacity: int, w: np.ndarray, u: np.ndarray) -> None:
    if w.shape != u.shape or w.ndim != 1:
        raise ValueError("w and u must be 1-D vectors of equal length")
    if len(w) < capacity:
        raise ValueError(
            f"cannot identify fit: {len(w)} points for capacity {capacity}"
        )
    if not np.all(np.diff(w) > 0):
        raise ValueError("w must be strictly increasing")


def _fit_spline(spec: SplineSpec, w: np.ndarray, u: np.ndarray) -> SplineFit:
    n_interior = spec.df - 4
    if n_interior > 0:
        levels = np.arange(1, n_interior + 1) / (n_interior + 1)
        interior = np.quantile(w, levels)
        if not np.all(np.diff(interior) > 0):
            raise ValueError("degenerate interior knots; reduce df")
    else:
        interior = np.empty(0)
    knots = np.concatenate([np.full(4, w[0]), interior, np.full(4, w[-1])])
    design = BSpline.design_matrix(w, knots, 3).toarray()
    coef, *_ = np.linalg.lstsq(design, u, rcond=None)
    return SplineFit(knots=knots, coefficients=coef)


def _node_sse(cs: np.ndarray, css: np.ndarray, a: int, b: int) -> float:
    s = cs[b] - cs[a]
    return css[b] - css[a] - s * s / (b - a)


def _best_split(cs: np.ndarray, css: np.ndarray, a: int, b: int):
    """Best single split of node [a, b); returns (gain, split_index) or None."""
    if b - a < 2:
        return None
    j = np.arange(a + 1, b)
    m_left = j - a
    m_right = b - j
    s_left = cs[j] - cs[a]
    s_right = cs[b] - cs[j]
    ss_left = css[j] - css[a]
    ss_right = css[b] - css[j]
    sse_split = (ss_left - s_left**2 / m_left) + (ss_right - s_right**2 / m_right)
    total = _node_sse(cs, css, a, b)
    gains = total - sse_split
    k = int(np.argmax(gains))  # leftmost split on ties
    if gains[k] <= 0.0:
        return None
    return float(gains[k]), a + 1 + k


def _fit_tree(spec: TreeSpec, w: np.ndarray, u: np.ndarray) -> TreeFit:
    cs = np.concatenate([[0.0], np.cumsum(u)])
    css = np.concatenate([[0.0], np.cumsum(u * u)])
    n = len(u)
    leaves = [(0, n)]
    # best-first growth: always split the leaf with the largest SSE reduction
    candidates = {}
    split = _best_split(cs, css, 0, n)
    if split is not None:
        candidates[(0, n)] = split
    while len(leaves) < spec.max_leaves and candidates:
        node = max(candidates, key=lambda k: (candidates[k][0], -k[0]))
        gain, j = candidates.pop(node)
        a, b = node
        leaves.remove(node)
        for child in ((a, j), (j, b)):
            leaves.append(child)
            child_split = _best_split(cs, css, *child)
            if child_split is not None:
                candidates[child] = child_split
    leaves.sort()
    boundaries = [a for a, _ in leaves[1:]]
    splits = np.array([(w[j - 1] + w[j]) / 2 for j in boundaries])
    values = np.array([np.mean(u[a:b]) for a, b in leaves])
    return TreeFit(splits=splits, leaf_values=values)


def fit(spec: LearnerSpec, points_w, points_u) -> FittedLearner:
    """Least-squares fit of the learner class to ``(w, u)`` pairs."""
    w = np.asarray(points_w, dtype=np.float64)
    u = np.asarray(points_u, dtype=np.float64)
    capacity = spec.df if isinstance(spec, SplineSpec) else spec.max_leaves
    _check_inputs(capacity, w, u)
    if np.ptp(u) == 0.0:
        return ConstantFit(float(u[0]))
    if isinstance(spec, SplineSpec):
        return _fit_spline(spec, w, u)
    return _fit_tree(spec, w, u)


def predict(learner: FittedLearner, w: float) -> float:
    return float(learner.predict_many(np.asarray([w]))[0])


def project_to_grid(learner: FittedLearner, grid: Grid) -> DiscreteFn:
    """Evaluate the fitted learner at every grid point."""
    return DiscreteFn(grid, learner.predict_many(grid.points))
