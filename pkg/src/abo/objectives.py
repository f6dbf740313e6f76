"""Test functions with known ground truth.

Objectives are representer-point expansions f(x) = sum_i w_i k(x, c_i) on
the unit cube, so their RKHS norm is known exactly and the optimum can be
located numerically once, at construction time.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from . import kernels
from .errors import InvalidSpecError
from .kernels import KernelSpec
from .rng import make_rng

_NORM_TOL = 1e-8


@dataclass(frozen=True)
class ObjectiveSpec:
    """Kernel expansion with known norm, maximum, and maximizer."""

    kernel: KernelSpec
    centers: np.ndarray  # (m, d)
    weights: np.ndarray  # (m,)
    true_norm: float
    f_max: float
    x_star: np.ndarray
    f_min: float

    @property
    def dim(self) -> int:
        return self.kernel.dim

    @property
    def value_range(self) -> float:
        return self.f_max - self.f_min

    def __call__(self, x):
        return evaluate_objective(self, x)

    def to_dict(self) -> dict:
        return {
            "kernel": {
                "family": self.kernel.family,
                "lengthscales": self.kernel.lengthscales.tolist(),
                "nu": self.kernel.nu,
            },
            "centers": self.centers.tolist(),
            "weights": self.weights.tolist(),
            "true_norm": self.true_norm,
            "f_max": self.f_max,
            "x_star": self.x_star.tolist(),
            "f_min": self.f_min,
        }

    @staticmethod
    def from_dict(data: dict) -> "ObjectiveSpec":
        k = data["kernel"]
        spec = KernelSpec(
            lengthscales=np.asarray(k["lengthscales"]),
            family=k["family"],
            nu=k.get("nu"),
        )
        return ObjectiveSpec(
            kernel=spec,
            centers=np.asarray(data["centers"], dtype=float),
            weights=np.asarray(data["weights"], dtype=float),
            true_norm=float(data["true_norm"]),
            f_max=float(data["f_max"]),
            x_star=np.asarray(data["x_star"], dtype=float),
            f_min=float(data["f_min"]),
        )


def evaluate_objective(spec: ObjectiveSpec, x):
    """Noiseless f(x) = sum_i w_i k(x, c_i); accepts (d,) or (n, d)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    vals = kernels.cross_gram(spec.kernel, np.atleast_2d(x), spec.centers) @ spec.weights
    return float(vals[0]) if single else vals


def _extrema_on_cube(kernel, centers, weights, d):
    """Numerical (min, argmin excluded) max/min of the expansion on [0,1]^d."""
    if d == 1:
        cand = np.linspace(0.0, 1.0, 10_000)[:, None]
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cand = qmc.Sobol(d, scramble=False).random(4096)
    vals = kernels.cross_gram(kernel, cand, centers) @ weights

    def refine(x0, sign):
        x = x0.copy()
        best = sign * float(
            (kernels.cross_gram(kernel, x[None], centers) @ weights)[0]
        )
        step = 0.05
        for _ in range(60):
            probes = np.clip(
                x + step * np.vstack([np.eye(d), -np.eye(d)]), 0.0, 1.0
            )
            pv = sign * (kernels.cross_gram(kernel, probes, centers) @ weights)
            j = int(np.argmax(pv))
            if pv[j] > best:
                best = float(pv[j])
                x = probes[j]
            else:
                step *= 0.6
        return x, sign * best

    # refine from several leading candidates; a single start can miss a
    # narrow global basin when the candidate set is coarse
    n_starts = 1 if d == 1 else 8
    order = np.argsort(vals)
    x_max, f_max = max(
        (refine(cand[i], +1.0) for i in order[-n_starts:]), key=lambda r: r[1]
    )
    _, f_min = min(
        (refine(cand[i], -1.0) for i in order[:n_starts]), key=lambda r: r[1]
    )
    return x_max, f_max, f_min


def _build_spec(kernel, centers, weights, target_norm):
    norm = kernels.rkhs_norm_of_expansion(kernel, centers, weights)
    if norm < 1e-12:
        raise InvalidSpecError("degenerate expansion with near-zero norm")
    weights = weights * (target_norm / norm)
    d = kernel.dim
    x_star, f_max, f_min = _extrema_on_cube(kernel, centers, weights, d)
    return ObjectiveSpec(
        kernel=kernel,
        centers=np.asarray(centers, dtype=float),
        weights=np.asarray(weights, dtype=float),
        true_norm=float(target_norm),
        f_max=f_max,
        x_star=np.asarray(x_star, dtype=float),
        f_min=f_min,
    )


def make_rkhs_function(
    kernel: KernelSpec, m: int, target_norm: float, seed: int
) -> ObjectiveSpec:
    """Random expansion with uniform centers, rescaled to the target norm."""
    if m < 1 or target_norm <= 0:
        raise InvalidSpecError("need m >= 1 and a positive target norm")
    d = kernel.dim
    for attempt in range(10):
        rng = make_rng(seed + attempt, tag="rkhs-function")
        centers = rng.uniform(size=(m, d))
        weights = rng.standard_normal(m)
        try:
            return _build_spec(kernel, centers, weights, target_norm)
        except InvalidSpecError:
            continue
    raise InvalidSpecError(
        f"could not draw a non-degenerate expansion after 10 attempts (seed {seed})"
    )


# Gram-eigenvalue cutoff (relative to the largest) below which sample
# directions are dropped; keeps the grid interpolation well-posed while
# discarding only numerically negligible components of the sample.
_EIG_CUT = 1e-9


def make_gp_sample_function(
    kernel: KernelSpec, grid_size: int, target_norm: float, seed: int
) -> ObjectiveSpec:
    """Interpolant of a GP sample at grid points, rescaled to the target norm.

    Function values are drawn from the prior at finitely many grid points and
    interpolated with the same kernel, which keeps the result inside the RKHS.
    The draw happens in the Gram eigenbasis with near-null directions
    discarded, so the representer weights stay moderate and the rescaled norm
    is exact to measurement precision.
    """
    if grid_size < 2:
        raise InvalidSpecError("grid_size must be >= 2")
    d = kernel.dim
    rng = make_rng(seed, tag="gp-sample")
    if d == 1:
        grid = np.linspace(0.0, 1.0, grid_size)[:, None]
    else:
        # scrambled so the grid does not alias the acquisition scan lattice
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            scramble_seed = int(rng.integers(2**32))
            grid = qmc.Sobol(d, scramble=True, seed=scramble_seed).random(grid_size)
    K = kernels.gram_matrix(kernel, grid)
    from .gp import _chol_with_jitter

    f_grid = _chol_with_jitter(K) @ rng.standard_normal(grid_size)
    # interpolation weights solve K w = f_grid; projecting out near-null
    # Gram directions keeps the weights moderate while discarding only a
    # numerically negligible component of the sample
    evals, vecs = np.linalg.eigh(K)
    coef = vecs.T @ f_grid
    keep = evals > _EIG_CUT * evals[-1]
    weights = vecs[:, keep] @ (coef[keep] / evals[keep])
    return _build_spec(kernel, grid, weights, target_norm)


def bump_linear_preset() -> ObjectiveSpec:
    """One-dimensional rising trend with a narrow off-trend bump.

    The global maximum sits on the bump near x = 0.2 while the trend creates
    a competing local maximum at the right edge; norm-rescaled so the
    expansion has RKHS norm 2 under a squared-exponential kernel with
    lengthscale 0.1.
    """
    kernel = KernelSpec(lengthscales=np.array([0.1]))
    trend_centers = np.linspace(0.0, 1.0, 21)
    trend_weights = 0.12 * trend_centers
    centers = np.concatenate([trend_centers, [0.2]])[:, None]
    weights = np.concatenate([trend_weights, [0.55]])
    return _build_spec(kernel, centers, weights, target_norm=2.0)


def regret_metrics(trace, spec: ObjectiveSpec) -> tuple[np.ndarray, np.ndarray]:
    """Simple and cumulative regret recomputed from the trace inputs."""
    X = np.asarray(trace.X, dtype=float)
    if X.size == 0:
        raise ValueError("trace is empty")
    f_vals = evaluate_objective(spec, X)
    inst = spec.f_max - f_vals
    simple = np.minimum.accumulate(inst)
    cumulative = np.cumsum(inst)
    return simple, cumulative
