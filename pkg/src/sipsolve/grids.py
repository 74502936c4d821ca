"""Uniform 1-D grids and grid-sampled functions.

Everything downstream (operators, solvers, metrics) works with functions
represented by their values on a uniform grid.  Integrals are approximated
by left Riemann sums, so the last grid point carries no quadrature weight;
off-grid evaluation is piecewise linear.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``n`` points on ``[lo, hi]``, both endpoints included.

    Points are ``lo + j * spacing`` for ``j = 0 .. n-1`` with the last point
    pinned to ``hi`` exactly (no accumulated rounding).
    """

    lo: float
    hi: float
    n: int

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"invalid range: lo={self.lo} must be < hi={self.hi}")
        if self.n < 2:
            raise ValueError(f"too few points: n={self.n}, need n >= 2")

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    @cached_property
    def points(self) -> np.ndarray:
        pts = np.linspace(self.lo, self.hi, self.n)
        pts.flags.writeable = False
        return pts


@dataclass(frozen=True, eq=False)
class DiscreteFn:
    """Real function sampled on a :class:`Grid` (one value per grid point)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.grid.n,):
            raise ValueError(
                f"values shape {vals.shape} does not match grid size {self.grid.n}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must all be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, grid: Grid) -> "DiscreteFn":
        return cls(grid, np.zeros(grid.n))

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "DiscreteFn":
        return cls(grid, np.asarray(fn(grid.points), dtype=np.float64))


def make_uniform_grid(lo: float, hi: float, n: int) -> Grid:
    """Build a uniform grid; raises ``ValueError`` for lo >= hi or n < 2."""
    return Grid(float(lo), float(hi), int(n))


def _require_same_grid(f: DiscreteFn, g: DiscreteFn) -> None:
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")


def inner_product(f: DiscreteFn, g: DiscreteFn) -> float:
    """Left-Riemann approximation of the L2 inner product on the grid interval.

    Computed as ``spacing * sum_{j<n-1} f_j * g_j``; the two functions must
    live on the identical grid (use :func:`restrict` first otherwise).
    """
    _require_same_grid(f, g)
    return f.grid.spacing * float(f.values[:-1] @ g.values[:-1])


def l2_norm(f: DiscreteFn) -> float:
    """Quadrature L2 norm, ``sqrt(inner_product(f, f))``."""
    return float(np.sqrt(max(inner_product(f, f), 0.0)))


def evaluate_interp(f: DiscreteFn, w: float) -> float:
    """Piecewise-linear evaluation at ``w``; exact at grid points.

    Raises ``ValueError`` when ``w`` lies outside the grid interval.
    """
    if w < f.grid.lo or w > f.grid.hi:
        raise ValueError(
            f"point {w} outside grid domain [{f.grid.lo}, {f.grid.hi}]"
        )
    return float(np.interp(w, f.grid.points, f.values))


def restrict(f: DiscreteFn, target: Grid) -> DiscreteFn:
    """Resample ``f`` onto ``target`` by piecewise-linear interpolation.

    The target interval must be contained in the source interval.  On the
    identical grid this is the identity.
    """
    if target.lo < f.grid.lo or target.hi > f.grid.hi:
        raise ValueError(
            f"target domain [{target.lo}, {target.hi}] not inside "
            f"[{f.grid.lo}, {f.grid.hi}]"
        )
    vals = np.interp(target.points, f.grid.points, f.values)
    return DiscreteFn(target, vals)
