"""Stationary kernels with per-dimension lengthscales.

All kernels are normalized so that k(x, x) = 1; any output scale is carried
by the RKHS norm bound instead of a signal variance.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatchError, InvalidSpecError, NumericalError

SQUARED_EXPONENTIAL = "se"
MATERN = "matern"

# Matern smoothness values with closed-form (polynomial x exponential)
# expressions; other values would need modified Bessel functions.
_MATERN_CLOSED_FORM = (1.5, 2.5)

GRAM_JITTER = 1e-10


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus strictly positive lengthscale vector."""

    lengthscales: np.ndarray
    family: str = SQUARED_EXPONENTIAL
    nu: float | None = None

    def __post_init__(self):
        ls = np.atleast_1d(np.array(self.lengthscales, dtype=float, copy=True))
        if ls.ndim != 1:
            raise InvalidSpecError("lengthscales must be a 1-d vector")
        if not np.all(np.isfinite(ls)) or np.any(ls <= 0):
            raise InvalidSpecError(
                f"lengthscales must be positive and finite, got {ls}"
            )
        ls.setflags(write=False)
        object.__setattr__(self, "lengthscales", ls)
        if self.family == MATERN:
            if self.nu is None or self.nu <= 1:
                raise InvalidSpecError("Matern kernels require nu > 1")
            if self.nu not in _MATERN_CLOSED_FORM:
                raise InvalidSpecError(
                    f"Matern nu={self.nu} unsupported; closed forms exist "
                    f"for nu in {_MATERN_CLOSED_FORM}"
                )
        elif self.family != SQUARED_EXPONENTIAL:
            raise InvalidSpecError(f"unknown kernel family {self.family!r}")

    @property
    def dim(self) -> int:
        return self.lengthscales.shape[0]

    def with_lengthscales(self, lengthscales) -> "KernelSpec":
        return replace(self, lengthscales=np.asarray(lengthscales, dtype=float))

    def scaled(self, factor: float) -> "KernelSpec":
        """Shrink all lengthscales by a common factor >= 1."""
        return self.with_lengthscales(self.lengthscales / factor)


def _check_points(spec: KernelSpec, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[-1] != spec.dim:
        raise DimensionMismatchError(
            f"points have dimension {X.shape[-1]}, kernel expects {spec.dim}"
        )
    if not np.all(np.isfinite(X)):
        raise DimensionMismatchError("points must be finite")
    return X


def cross_gram(spec: KernelSpec, X, X2) -> np.ndarray:
    """Kernel matrix k(X_i, X2_j) of shape (n, m)."""
    X = _check_points(spec, X)
    X2 = _check_points(spec, X2)
    diff = (X[:, None, :] - X2[None, :, :]) / spec.lengthscales
    sq = np.einsum("nmd,nmd->nm", diff, diff)
    if spec.family == SQUARED_EXPONENTIAL:
        return np.exp(-0.5 * sq)
    s = np.sqrt(np.maximum(sq, 0.0))
    if spec.nu == 1.5:
        r = np.sqrt(3.0) * s
        return (1.0 + r) * np.exp(-r)
    r = np.sqrt(5.0) * s
    return (1.0 + r + r * r / 3.0) * np.exp(-r)


def evaluate(spec: KernelSpec, x, x2) -> float:
    """Scalar kernel value k(x, x2); symmetric, equals 1 at x == x2."""
    return float(cross_gram(spec, np.atleast_2d(x), np.atleast_2d(x2))[0, 0])


def gram_matrix(spec: KernelSpec, X) -> np.ndarray:
    """Symmetric PSD kernel matrix with unit diagonal; n may be 0."""
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        return np.zeros((0, 0))
    K = cross_gram(spec, X, X)
    # enforce exact symmetry/unit diagonal against rounding
    K = 0.5 * (K + K.T)
    np.fill_diagonal(K, 1.0)
    return K


def rkhs_norm_of_expansion(spec: KernelSpec, centers, weights) -> float:
    """RKHS norm sqrt(w^T K w) of f = sum_i w_i k(., c_i)."""
    w = np.atleast_1d(np.asarray(weights, dtype=float))
    K = gram_matrix(spec, centers)
    if K.shape[0] != w.shape[0]:
        raise DimensionMismatchError(
            f"{K.shape[0]} centers but {w.shape[0]} weights"
        )
    q = float(w @ K @ w)
    if q < -1e-10:
        raise NumericalError(f"quadratic form {q} is negative beyond tolerance")
    return float(np.sqrt(max(q, 0.0)))


def interpolant_norm(spec: KernelSpec, grid, values, jitter: float = GRAM_JITTER) -> float:
    """Norm of the minimum-norm interpolant through (grid, values).

    Computes sqrt(v^T (K + jitter I)^{-1} v); a lower bound on the RKHS norm
    of any function matching the values on the grid.
    """
    v = np.atleast_1d(np.asarray(values, dtype=float))
    K = gram_matrix(spec, grid)
    K = K + jitter * np.eye(K.shape[0])
    from scipy.linalg import cho_factor, cho_solve

    c, low = cho_factor(K, lower=True)
    q = float(v @ cho_solve((c, low), v))
    return float(np.sqrt(max(q, 0.0)))
