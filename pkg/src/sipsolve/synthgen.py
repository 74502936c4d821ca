"""Seeded synthetic data generators for the two operator families.

Scalar-on-function regression: Brownian-path covariates on [0, 1], responses
from the forward operator on a fine simulation grid plus Gaussian noise
calibrated by a noise-to-signal ratio; emitted paths are subsampled to a
coarser observation grid.  A logistic variant draws +/-1 labels whose
log-odds are the noiseless response.

Deconvolution: a Gaussian peak target on [-10, 10]; observations are the
Heaviside-kernel forward values at the coarse-grid locations, in seeded
shuffled order, plus Gaussian noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit

from .grids import DiscreteFn, Grid, make_uniform_grid
from .operators import Sample
from .rng import make_rng, standard_normals


class TargetKind(Enum):
    SINE = "sine"
    STEP = "step"
    GAUSS_PEAK = "gauss_peak"

    @classmethod
    def parse(cls, text: str) -> "TargetKind":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown target {text!r}; expected 'sine', 'step' or 'gauss_peak'"
            ) from None


def _check_domain(grid: Grid, lo: float, hi: float, name: str) -> None:
    if abs(grid.lo - lo) > 1e-12 or abs(grid.hi - hi) > 1e-12:
        raise ValueError(
            f"{name} target expects domain [{lo}, {hi}], "
            f"got [{grid.lo}, {grid.hi}]"
        )


def make_target(kind: TargetKind, grid: Grid) -> DiscreteFn:
    """Sample a named target function on its natural domain."""
    w = grid.points
    if kind is TargetKind.SINE:
        _check_domain(grid, 0.0, 1.0, "sine")
        return DiscreteFn(grid, np.sin(4.0 * np.pi * w))
    if kind is TargetKind.STEP:
        _check_domain(grid, 0.0, 1.0, "step")
        # +1 on [0, .25), -1 on [.25, .5), +1 on [.5, .75), -1 on [.75, 1]
        segment = np.clip(np.floor(w / 0.25), 0, 3).astype(int)
        return DiscreteFn(grid, np.where(segment % 2 == 0, 1.0, -1.0))
    _check_domain(grid, -10.0, 10.0, "gauss_peak")
    return DiscreteFn(grid, np.exp(-(w**2)))


def simulate_brownian(grid: Grid, rng: np.random.Generator) -> DiscreteFn:
    """Brownian path on [0, 1]: zero start, independent sqrt(spacing) steps."""
    _check_domain(grid, 0.0, 1.0, "brownian")
    increments = np.sqrt(grid.spacing) * standard_normals(rng, grid.n - 1)
    values = np.concatenate([[0.0], np.cumsum(increments)])
    return DiscreteFn(grid, values)


@dataclass(frozen=True)
class FlrGenConfig:
    n_samples: int
    fine_n: int = 1000
    obs_n: int = 100
    nsr: float = 0.2
    target: TargetKind = TargetKind.SINE
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if self.obs_n > self.fine_n:
            raise ValueError("obs_n must not exceed fine_n")
        if self.nsr < 0:
            raise ValueError("nsr must be nonnegative")


_PATH_BLOCK = 4096


def _flr_paths_and_signal(config: FlrGenConfig):
    """Simulate paths on the fine grid; return obs-grid paths and noiseless y.

    Increments are drawn in blocks for speed; the draw order (hence every
    path) is bit-identical to sequential :func:`simulate_brownian` calls.
    """
    fine = make_uniform_grid(0.0, 1.0, config.fine_n)
    obs = make_uniform_grid(0.0, 1.0, config.obs_n)
    f_true = make_target(config.target, fine)
    rng = make_rng(config.seed)
    spacing = fine.spacing
    fvals = f_true.values
    obs_paths = np.empty((config.n_samples, config.obs_n))
    y_star = np.empty(config.n_samples)
    root_h = np.sqrt(spacing)
    for start in range(0, config.n_samples, _PATH_BLOCK):
        stop = min(start + _PATH_BLOCK, config.n_samples)
        incr = root_h * standard_normals(rng, (stop - start, config.fine_n - 1))
        paths = np.concatenate(
            [np.zeros((stop - start, 1)), np.cumsum(incr, axis=1)], axis=1
        )
        for i in range(stop - start):
            y_star[start + i] = spacing * float(paths[i, :-1] @ fvals[:-1])
            obs_paths[start + i] = np.interp(obs.points, fine.points, paths[i])
    return obs, f_true, rng, obs_paths, y_star


def gen_flr(config: FlrGenConfig):
    """Regression sample: ``(samples, f_true, sigma_eps)``.

    Noise scale is ``nsr`` times the sample standard deviation of the
    noiseless responses; paths are drawn first, then one noise vector.
    """
    obs, f_true, rng, obs_paths, y_star = _flr_paths_and_signal(config)
    sigma = config.nsr * float(np.std(y_star, ddof=1)) if config.n_samples > 1 else 0.0
    y = y_star + sigma * standard_normals(rng, config.n_samples)
    samples = [
        Sample(DiscreteFn(obs, obs_paths[i]), float(y[i]))
        for i in range(config.n_samples)
    ]
    return samples, f_true, sigma


def gen_flr_classification(config: FlrGenConfig):
    """Classification sample with labels in {-1, +1}: ``(samples, f_true)``.

    P(y = +1 | path) is the logistic of the noiseless forward value; the
    ``nsr`` field is ignored.
    """
    obs, f_true, rng, obs_paths, eta = _flr_paths_and_signal(config)
    u = rng.random(config.n_samples)
    y = np.where(u < expit(eta), 1.0, -1.0)
    samples = [
        Sample(DiscreteFn(obs, obs_paths[i]), float(y[i]))
        for i in range(config.n_samples)
    ]
    return samples, f_true


def _grid_from_spacing(lo: float, hi: float, spacing: float) -> Grid:
    n = round((hi - lo) / spacing) + 1
    grid = make_uniform_grid(lo, hi, n)
    if abs(grid.spacing - spacing) > 1e-9 * spacing:
        raise ValueError(f"spacing {spacing} does not tile [{lo}, {hi}]")
    return grid


@dataclass(frozen=True)
class DeconvGenConfig:
    n_samples: int | None = None  # None: one sample per coarse grid point
    fine_spacing: float = 0.01
    obs_spacing: float = 0.1
    noise_sd: float = float(np.sqrt(2.0))
    seed: int = 0

    def __post_init__(self) -> None:
        if self.obs_spacing < self.fine_spacing:
            raise ValueError("obs_spacing must be >= fine_spacing")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")
        if self.n_samples is not None and self.n_samples < 1:
            raise ValueError("n_samples must be positive")


def gen_deconv(config: DeconvGenConfig):
    """Deconvolution sample: ``(samples, f_true)``.

    Responses are fine-grid quadratures of the Heaviside-kernel forward map
    at the coarse-grid locations, visited in a seeded random order, plus
    N(0, noise_sd^2) noise.  ``f_true`` lives on the fine grid.
    """
    fine = _grid_from_spacing(-10.0, 10.0, config.fine_spacing)
    coarse = _grid_from_spacing(-10.0, 10.0, config.obs_spacing)
    f_true = make_target(TargetKind.GAUSS_PEAK, fine)
    n = config.n_samples if config.n_samples is not None else coarse.n
    if n > coarse.n:
        raise ValueError(f"n_samples {n} exceeds the {coarse.n} coarse grid points")
    rng = make_rng(config.seed)
    order = rng.permutation(coarse.n)[:n]
    locations = coarse.points[order]
    # forward values by fine left-Riemann sums: cumulative mass of f up to x
    mass = np.concatenate([[0.0], np.cumsum(f_true.values[:-1])]) * fine.spacing
    counts = np.searchsorted(fine.points[:-1], locations, side="right")
    y = mass[counts] + config.noise_sd * standard_normals(rng, n)
    samples = [Sample(float(x), float(yy)) for x, yy in zip(locations, y)]
    return samples, f_true
