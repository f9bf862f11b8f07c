"""Empirical spectral measures, logarithmic potentials and test functions.

The logarithmic potential of ``M`` at ``z`` is ``(1/n) sum_j log sigma_j(M - zI)``.
:func:`green_quadrature` integrates ``Delta phi * L_M`` over the support of the
test function, which by Green's formula recovers ``2 pi * int phi d mu_M``;
:func:`mc_replacement` estimates the same difference by uniform sampling.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .linalg import as_matrix, eigenvalues, singular_values
from .perturbations import SeededRng

__all__ = [
    "EmpiricalMeasure",
    "BumpTestFunction",
    "ReplacementConstants",
    "QuadratureResult",
    "MonteCarloResult",
    "esm",
    "log_potential",
    "log_potential_many",
    "nu_small_count",
    "replacement_constants",
    "integrate_esm",
    "green_quadrature",
    "mc_replacement",
    "mc_error_bound",
    "QuadratureTooCoarse",
]

log = logging.getLogger(__name__)

_BATCH = 4096


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Uniform probability measure on a finite list of complex atoms."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128).ravel()
        if pts.size == 0:
            raise ValueError("an empirical measure needs at least one atom")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.size

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.points.size, 1.0 / self.points.size)


@dataclass(frozen=True)
class BumpTestFunction:
    """Radial bump ``amplitude * exp(1 - 1/(1 - |z - center|^2 / radius^2))`` on the open disk."""

    center: complex = 0.0
    radius: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", complex(self.center))

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    @property
    def origin_distance(self) -> float:
        return max(0.0, abs(self.center) - self.radius)

    def _s(self, z) -> np.ndarray:
        return np.abs(np.asarray(z, dtype=np.complex128) - self.center) ** 2 / self.radius**2

    def value(self, z):
        s = self._s(z)
        inside = s < 1.0
        out = np.zeros(s.shape)
        si = s[inside]
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - si))
        return out if out.ndim else float(out)

    def laplacian(self, z):
        # radial profile G(s), s = rho^2 / r^2:  Delta = (4 / r^2) (s G'' + G')
        s = self._s(z)
        inside = s < 1.0
        out = np.zeros(s.shape)
        si = s[inside]
        u = 1.0 - si
        G = np.exp(1.0 - 1.0 / u)
        out[inside] = self.amplitude * (4.0 / self.radius**2) * G * (si / u**4 - 2.0 * si / u**3 - 1.0 / u**2)
        return out if out.ndim else float(out)

    def laplacian_sup(self, samples: int = 100_000) -> tuple[float, float]:
        """``||Delta phi||_inf`` by a dense radial grid plus a local refinement.

        Returns ``(sup, grid_resolution)``.
        """
        rho = np.linspace(0.0, self.radius, samples + 1)[:-1]
        vals = np.abs(self.laplacian(self.center + rho))
        i = int(np.argmax(vals))
        step = self.radius / samples
        lo, hi = max(0.0, rho[i] - step), min(self.radius, rho[i] + step)
        best = float(vals[i])
        if hi > lo:
            res = minimize_scalar(lambda t: -abs(self.laplacian(self.center + t)),
                                  bounds=(lo, hi), method="bounded",
                                  options={"xatol": step * 1e-6})
            best = max(best, float(-res.fun))
        return best, step


@dataclass(frozen=True)
class ReplacementConstants:
    c_main: float
    c_area: float
    lap_sup: float
    area_K: float
    diam_D: float
    dist_frakD: float
    lap_grid_resolution: float


class QuadratureResult(NamedTuple):
    value: float
    error_estimate: float
    skipped_area: float


class MonteCarloResult(NamedTuple):
    estimate: float
    samples: np.ndarray
    integrand: np.ndarray


class QuadratureTooCoarse(RuntimeError):
    pass


def esm(M) -> EmpiricalMeasure:
    return EmpiricalMeasure(eigenvalues(M))


def log_potential(M, z: complex) -> float:
    """``(1/n) sum_j log sigma_j(M - zI)``; ``-inf`` when a singular value is exactly 0."""
    A = as_matrix(M)
    n = A.shape[0]
    s = singular_values(A - complex(z) * np.eye(n))
    if np.any(s == 0.0):
        return -math.inf
    return float(np.sum(np.log(s)) / n)


def log_potential_many(M, zs) -> np.ndarray:
    """:func:`log_potential` at many points, with batched SVDs."""
    A = as_matrix(M)
    n = A.shape[0]
    zs = np.asarray(zs, dtype=np.complex128).ravel()
    out = np.empty(zs.size)
    eye = np.eye(n, dtype=np.complex128)
    for start in range(0, zs.size, _BATCH):
        zb = zs[start:start + _BATCH]
        stack = A[None, :, :] - zb[:, None, None] * eye[None, :, :]
        s = np.linalg.svd(stack, compute_uv=False)
        with np.errstate(divide="ignore"):
            out[start:start + zb.size] = np.sum(np.log(s), axis=1) / n
    return out


def nu_small_count(M, z: complex, eps: float) -> float:
    """Fraction of singular values of ``M - zI`` in the closed interval ``[0, eps]``."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    A = as_matrix(M)
    s = singular_values(A - complex(z) * np.eye(A.shape[0]))
    return float(np.count_nonzero(s <= eps)) / s.size


def replacement_constants(phi: BumpTestFunction, samples: int = 100_000) -> ReplacementConstants:
    lap_sup, resolution = phi.laplacian_sup(samples)
    K = phi.area
    D = phi.diameter
    dD = phi.origin_distance
    log_term = max(math.log(D + 1) ** 2 - math.log(D + 1) + 0.5, 1.0)
    c_area = math.pi * (D + 1) ** 2 * (math.log(2 + dD + D) ** 2 / math.log(2) ** 2) * log_term
    c_main = (2 * max(K, math.sqrt(K)) * lap_sup * (D + 1) * math.log(2 + dD + D)
              / (math.sqrt(math.pi) * math.log(2))) * math.sqrt(log_term)
    return ReplacementConstants(c_main, c_area, lap_sup, K, D, dD, resolution)


def integrate_esm(phi: BumpTestFunction, mu: EmpiricalMeasure) -> float:
    return float(np.mean(phi.value(mu.points)))


def _grid(phi: BumpTestFunction, h: float) -> np.ndarray:
    r = phi.radius
    m = int(math.ceil(2 * r / h))
    offs = -m * h / 2 + (np.arange(m) + 0.5) * h
    X, Y = np.meshgrid(offs, offs)
    Z = phi.center + (X + 1j * Y).ravel()
    return Z[np.abs(Z - phi.center) < r]


def _green_sum(phi: BumpTestFunction, A: np.ndarray, h: float) -> tuple[float, float]:
    Z = _grid(phi, h)
    L = log_potential_many(A, Z)
    lap = phi.laplacian(Z)
    bad = ~np.isfinite(L)
    total = float(np.sum(lap[~bad] * L[~bad])) * h * h
    skipped = 0.0
    for z in Z[bad]:
        # subdivide once; sub-cells still hitting an eigenvalue are dropped
        sub = z + (h / 4) * np.array([-1 - 1j, -1 + 1j, 1 - 1j, 1 + 1j])
        Ls = log_potential_many(A, sub)
        ok = np.isfinite(Ls)
        total += float(np.sum(phi.laplacian(sub[ok]) * Ls[ok])) * (h / 2) ** 2
        skipped += np.count_nonzero(~ok) * (h / 2) ** 2
    if skipped:
        log.warning("green quadrature skipped area %.3g at eigenvalue-hitting cells", skipped)
    return total / (2 * math.pi), skipped


def green_quadrature(phi: BumpTestFunction, M, h: float, tol: float | None = None) -> QuadratureResult:
    """Midpoint rule for ``(1/2pi) int Delta phi(z) L_M(z) d^2z`` over the disk.

    The error estimate compares against the same rule at step ``2h``
    (Richardson factor 1/3 for a second-order rule).  If ``tol`` is given and
    the estimate exceeds it, :class:`QuadratureTooCoarse` is raised.
    """
    if not h > 0:
        raise ValueError("grid step must be positive")
    A = as_matrix(M)
    fine, skipped = _green_sum(phi, A, h)
    coarse, _ = _green_sum(phi, A, 2 * h)
    err = abs(fine - coarse) / 3.0
    if tol is not None and err > tol:
        raise QuadratureTooCoarse(f"step {h} gives error estimate {err:.3g} > {tol:.3g}")
    return QuadratureResult(fine, err, skipped)


def _uniform_disk(gen: np.random.Generator, phi: BumpTestFunction, m: int) -> np.ndarray:
    out = np.empty(0, dtype=np.complex128)
    r = phi.radius
    while out.size < m:
        k = 2 * (m - out.size) + 16
        pts = (gen.uniform(-r, r, k) + 1j * gen.uniform(-r, r, k))
        out = np.concatenate([out, pts[np.abs(pts) < r]])
    return phi.center + out[:m]


def mc_replacement(M1, M2, phi: BumpTestFunction, m: int, rng: SeededRng) -> MonteCarloResult:
    """Monte Carlo estimate of ``int phi d mu_{M1} - int phi d mu_{M2}``.

    ``|K| / (2 pi m) * sum_j Delta phi(Z_j) (L_{M1}(Z_j) - L_{M2}(Z_j))`` with
    ``Z_j`` uniform on the disk ``K``.  Points where a potential is ``-inf``
    are redrawn.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    A1, A2 = as_matrix(M1), as_matrix(M2)
    gen = rng.generator()
    Z = _uniform_disk(gen, phi, m)
    while True:
        L1 = log_potential_many(A1, Z)
        L2 = log_potential_many(A2, Z)
        bad = ~(np.isfinite(L1) & np.isfinite(L2))
        if not bad.any():
            break
        Z[bad] = _uniform_disk(gen, phi, int(bad.sum()))
    F = phi.laplacian(Z) * (L1 - L2)
    estimate = phi.area / (2 * math.pi * m) * float(np.sum(F))
    return MonteCarloResult(estimate, Z, F)


def mc_error_bound(phi: BumpTestFunction, m: int, eps: float, T: float,
                   constants: ReplacementConstants | None = None) -> float:
    """``4 sqrt(|K| c_area) ||Delta phi|| log T / (2 pi m sqrt(eps))``, the sampling-error bound."""
    if T <= 2:
        raise ValueError("T must exceed 2")
    c = constants or replacement_constants(phi)
    return 4 * math.sqrt(c.area_K * c.c_area) * c.lap_sup * math.log(T) / (2 * math.pi * m * math.sqrt(eps))
