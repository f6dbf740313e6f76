"""Exact Gaussian-process posterior inference on accumulated observations.

States are immutable: adding data or swapping the kernel returns a new
object with a freshly built Cholesky factorization of (K + sigma^2 I).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from . import kernels
from .errors import InvalidObservationError, SingularModelError
from .kernels import KernelSpec

_BASE_JITTER = 1e-10
_MAX_JITTER = 1e-6


def _chol_with_jitter(A: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of A, adding escalating jitter only on failure."""
    jitter = 0.0
    eye = np.eye(A.shape[0])
    while jitter <= _MAX_JITTER:
        try:
            return cholesky(A + jitter * eye, lower=True)
        except np.linalg.LinAlgError:
            jitter = _BASE_JITTER if jitter == 0.0 else jitter * 10.0
    raise SingularModelError(
        f"Cholesky failed for {A.shape[0]}x{A.shape[0]} matrix even with "
        f"jitter {_MAX_JITTER}"
    )


class GaussianProcess:
    """Zero-mean GP conditioned on noisy observations.

    Parameters
    ----------
    kernel:
        Prior covariance specification (unit variance).
    noise_sigma:
        Observation-noise standard deviation, > 0.
    X, y:
        Optional initial data, shapes (t, d) and (t,).
    """

    def __init__(self, kernel: KernelSpec, noise_sigma: float, X=None, y=None):
        if noise_sigma <= 0:
            raise ValueError("noise_sigma must be positive")
        self.kernel = kernel
        self.noise_sigma = float(noise_sigma)
        if X is None:
            X = np.zeros((0, kernel.dim))
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if y is None:
            y = np.zeros(0)
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y lengths differ")
        if X.shape[0] and X.shape[1] != kernel.dim:
            from .errors import DimensionMismatchError

            raise DimensionMismatchError(
                f"data dimension {X.shape[1]} != kernel dimension {kernel.dim}"
            )
        if y.size and not np.all(np.isfinite(y)):
            raise InvalidObservationError("observations must be finite")
        self.X = X
        self.y = y
        self._factorize()

    def _factorize(self):
        t = self.num_observations
        if t == 0:
            self._L = np.zeros((0, 0))
            self._alpha = np.zeros(0)
            return
        K = kernels.gram_matrix(self.kernel, self.X)
        A = K + self.noise_sigma**2 * np.eye(t)
        self._L = _chol_with_jitter(A)
        z = solve_triangular(self._L, self.y, lower=True)
        self._alpha = solve_triangular(self._L.T, z, lower=False)

    @property
    def num_observations(self) -> int:
        return self.X.shape[0]

    def add_observation(self, x, y: float) -> "GaussianProcess":
        """New state with (x, y) appended; factorization fully rebuilt."""
        if not np.isfinite(y):
            raise InvalidObservationError(f"non-finite observation {y}")
        x = np.atleast_1d(np.asarray(x, dtype=float)).reshape(1, -1)
        X = np.vstack([self.X, x]) if self.num_observations else x
        yv = np.append(self.y, float(y))
        return GaussianProcess(self.kernel, self.noise_sigma, X, yv)

    def set_kernel(self, kernel: KernelSpec) -> "GaussianProcess":
        """Same data reinterpreted under a new prior covariance."""
        return GaussianProcess(kernel, self.noise_sigma, self.X, self.y)

    def posterior(self, Xq) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and variance at a batch of query points (n, d)."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        n = Xq.shape[0]
        if self.num_observations == 0:
            return np.zeros(n), np.ones(n)
        Kx = kernels.cross_gram(self.kernel, Xq, self.X)  # (n, t)
        mean = Kx @ self._alpha
        V = solve_triangular(self._L, Kx.T, lower=True)  # (t, n)
        var = 1.0 - np.einsum("tn,tn->n", V, V)
        return mean, np.clip(var, 0.0, 1.0)

    def posterior_mean_var(self, x) -> tuple[float, float]:
        """Posterior mean and variance at a single query point."""
        mean, var = self.posterior(np.atleast_2d(x))
        return float(mean[0]), float(var[0])

    def mutual_information(self) -> float:
        """0.5 ln det(I + sigma^-2 K) over the collected inputs.

        Independent of the observation values; 0 for an empty state.
        """
        t = self.num_observations
        if t == 0:
            return 0.0
        # det(K + s^2 I) / s^(2t) = det(I + K / s^2)
        logdet = 2.0 * float(np.sum(np.log(np.diag(self._L))))
        return 0.5 * (logdet - 2.0 * t * math.log(self.noise_sigma))

    def log_marginal_likelihood(self) -> float:
        """Gaussian evidence of the observations under the current prior."""
        t = self.num_observations
        if t == 0:
            return 0.0
        fit = -0.5 * float(self.y @ self._alpha)
        logdet = float(np.sum(np.log(np.diag(self._L))))
        return fit - logdet - 0.5 * t * math.log(2.0 * math.pi)
