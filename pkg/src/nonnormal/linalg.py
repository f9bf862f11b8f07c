"""Dense complex matrix primitives.

Every matrix in the package is a square ``complex128`` :class:`numpy.ndarray`.
Spectra come from LAPACK through :mod:`scipy.linalg`; this module adds input
validation, canonical ordering and the log-determinant conventions the bound
evaluators rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

__all__ = [
    "NumericalBackendError",
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "as_matrix",
    "canonical_order",
    "eigenvalues",
    "singular_values",
    "smallest_singular_value",
    "spectral_norm",
    "frobenius_norm",
    "log_abs_det",
    "numerical_rank",
    "lu_log_abs_det",
]


class NumericalBackendError(RuntimeError):
    """The dense eigen/SVD backend failed to converge."""


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by the audits.

    ``rank_rtol`` thresholds singular values relative to the largest one,
    ``slack_atol`` is the allowed negative slack of a bound audit (scaled by
    ``max(1, |rhs|)``), ``unit_modulus`` the accepted deviation of a point on
    the unit circle.
    """

    rank_rtol: float = 1e-10
    slack_atol: float = 1e-9
    unit_modulus: float = 1e-12
    weyl_atol: float = 1e-10

    def scaled(self, factor: float) -> "Tolerances":
        if factor <= 0:
            raise ValueError("tolerance scale must be positive")
        return replace(
            self,
            rank_rtol=self.rank_rtol * factor,
            slack_atol=self.slack_atol * factor,
            unit_modulus=self.unit_modulus * factor,
            weyl_atol=self.weyl_atol * factor,
        )


DEFAULT_TOLERANCES = Tolerances()


def as_matrix(M) -> np.ndarray:
    """Validate ``M`` as a finite square matrix and return it as complex128."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def canonical_order(values) -> np.ndarray:
    """Sort complex values by modulus descending, then argument ascending.

    The sort is stable, so exact ties keep the order they came in.
    """
    v = np.asarray(values, dtype=np.complex128)
    idx = np.lexsort((np.angle(v), -np.abs(v)))
    return v[idx]


def eigenvalues(M) -> np.ndarray:
    """All ``n`` eigenvalues of ``M`` in canonical order."""
    A = as_matrix(M)
    try:
        lam = scipy.linalg.eigvals(A, check_finite=False, overwrite_a=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalBackendError(f"eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(lam)):
        raise NumericalBackendError("eigensolver returned non-finite values")
    return canonical_order(lam)


def singular_values(M) -> np.ndarray:
    """Singular values of ``M``, descending."""
    A = as_matrix(M)
    try:
        s = scipy.linalg.svdvals(A, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        # gesdd occasionally fails where the slower gesvd converges
        try:
            s = scipy.linalg.svd(A, compute_uv=False, lapack_driver="gesvd", check_finite=False)
        except (np.linalg.LinAlgError, ValueError):
            raise NumericalBackendError(f"SVD failed: {exc}") from exc
    return np.sort(np.asarray(s, dtype=np.float64))[::-1]


def smallest_singular_value(M) -> float:
    return float(singular_values(M)[-1])


def spectral_norm(M) -> float:
    return float(singular_values(M)[0])


def frobenius_norm(M) -> float:
    A = as_matrix(M)
    return float(math.sqrt(np.sum(np.abs(A) ** 2)))


def log_abs_det(M) -> float:
    """``log|det M|`` summed over singular values.

    Returns ``-inf`` when a singular value is exactly zero; callers treat that
    as a violated ``sigma_min > 0`` hypothesis.
    """
    s = singular_values(M)
    if np.any(s == 0.0):
        return -math.inf
    return float(np.sum(np.log(s)))


def numerical_rank(M, rtol: float = DEFAULT_TOLERANCES.rank_rtol) -> int:
    """Number of singular values above ``rtol * sigma_1`` (0 for the zero matrix)."""
    s = singular_values(M)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def lu_log_abs_det(M) -> float:
    """``log|det M|`` from a pivoted LU factorization; independent of the SVD path."""
    A = as_matrix(M)
    lu, _ = scipy.linalg.lu_factor(A, check_finite=False)
    d = np.abs(np.diag(lu))
    if np.any(d == 0.0):
        return -math.inf
    return float(np.sum(np.log(d)))
