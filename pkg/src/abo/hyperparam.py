"""MAP lengthscale estimation and its combination with the schedule."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularModelError
from .gp import GaussianProcess

log = logging.getLogger(__name__)

# Search box for lengthscales (inputs live on the unit cube).
BOX_LOW = 1e-3
BOX_HIGH = 1e2

# MAP estimates may move at most one decade away from the initial guess.
TRUNCATION_FACTOR = 10.0

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_SWEEPS = 3
_GOLDEN_ITERS = 30


@dataclass(frozen=True)
class LengthscalePrior:
    """Independent gamma prior per lengthscale dimension."""

    shape: float = 2.0
    rate: float = 10.0

    def __post_init__(self):
        if self.shape <= 0 or self.rate <= 0:
            raise ValueError("gamma shape and rate must be positive")

    @property
    def mode(self) -> float:
        return max(self.shape - 1.0, 0.0) / self.rate

    def log_density(self, theta: np.ndarray) -> float:
        # unnormalized: the constant does not affect the MAP location
        return float(
            np.sum((self.shape - 1.0) * np.log(theta) - self.rate * theta)
        )


@dataclass(frozen=True)
class MapResult:
    theta_map: np.ndarray
    log_posterior: float


def log_marginal_likelihood(state: GaussianProcess) -> float:
    """Gaussian evidence of the data under the state's kernel and noise."""
    return state.log_marginal_likelihood()


def _objective(state: GaussianProcess, prior: LengthscalePrior, theta: np.ndarray) -> float:
    try:
        swapped = state.set_kernel(state.kernel.with_lengthscales(theta))
    except SingularModelError:
        return -math.inf
    return swapped.log_marginal_likelihood() + prior.log_density(theta)


def _golden_section(f, lo: float, hi: float) -> tuple[float, float]:
    """Maximize f on [lo, hi] by golden-section search; returns (x, f(x))."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(_GOLDEN_ITERS):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = c if fc >= fd else d
    return x, max(fc, fd)


def map_estimate(
    state: GaussianProcess, prior: LengthscalePrior, init
) -> MapResult:
    """MAP lengthscales via multi-start coordinate descent in log space.

    The search box is [1e-3, 100] per dimension, tightened to within one
    decade of ``init``. Deterministic: five fixed starts, three coordinate
    sweeps each, golden-section per coordinate.
    """
    init = np.atleast_1d(np.asarray(init, dtype=float))
    d = init.shape[0]
    lo = np.maximum(BOX_LOW, init / TRUNCATION_FACTOR)
    hi = np.minimum(BOX_HIGH, init * TRUNCATION_FACTOR)
    clip = lambda th: np.clip(th, lo, hi)

    starts = [
        clip(init),
        clip(np.full(d, prior.mode if prior.mode > 0 else BOX_LOW)),
        clip(np.sqrt(lo * hi)),
        clip(init / 3.0),
        clip(init * 3.0),
    ]

    best_theta = clip(init)
    best_val = _objective(state, prior, best_theta)
    if not math.isfinite(best_val):
        log.warning("MAP objective non-finite at init; returning init")
        return MapResult(best_theta, best_val)

    for start in starts:
        theta = start.copy()
        val = _objective(state, prior, theta)
        if not math.isfinite(val):
            continue
        for _ in range(_SWEEPS):
            for i in range(d):
                def f(log_ti, i=i, theta=theta):
                    cand = theta.copy()
                    cand[i] = math.exp(log_ti)
                    return _objective(state, prior, cand)

                x, fx = _golden_section(
                    f, math.log(lo[i]), math.log(hi[i])
                )
                if fx > val:
                    theta[i] = math.exp(x)
                    val = fx
        if val > best_val:
            best_theta, best_val = theta, val

    return MapResult(best_theta, best_val)


def combine_max(theta_map, theta0, g: float) -> np.ndarray:
    """Elementwise min(theta_map, theta0 / g): schedule as an upper bound."""
    if g < 1:
        raise ValueError("g must be >= 1")
    theta_map = np.atleast_1d(np.asarray(theta_map, dtype=float))
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    return np.minimum(theta_map, theta0 / g)


def combine_scale(theta_map, g: float) -> np.ndarray:
    """Scale the MAP estimate itself down by max(g, 1)."""
    theta_map = np.atleast_1d(np.asarray(theta_map, dtype=float))
    return theta_map / max(g, 1.0)
