"""Wasserstein-1 distances between uniform atomic measures.

Equal-size uniform measures reduce W1 to an assignment problem, solved exactly
with :func:`scipy.optimize.linear_sum_assignment`.  Larger clouds fall back to
the square-partition pairing, which gives a certified upper bound.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .builders import ToeplitzSymbol, build_toeplitz, symbol_samples
from .linalg import NumericalBackendError, smallest_singular_value
from .perturbations import PerturbationSpec, SeededRng, apply_additive
from .potential import EmpiricalMeasure, esm

__all__ = [
    "Method",
    "RectWindow",
    "TransportResult",
    "BudgetExceeded",
    "EXACT_BUDGET",
    "limit_measure_samples",
    "w1_exact",
    "w1_uniform",
    "w1_square_pairing",
    "recipe_half_side",
    "count_in_window",
    "concentration_profile",
    "RateRow",
    "RateTable",
    "rate_experiment",
]

log = logging.getLogger(__name__)

EXACT_BUDGET = 1024


class Method(str, enum.Enum):
    EXACT = "exact-assignment"
    SQUARE = "square-pairing"


class BudgetExceeded(ValueError):
    """The exact solver was asked for more atoms than its budget allows."""


@dataclass(frozen=True)
class RectWindow:
    """Closed box ``|Re(w - z)| <= r1``, ``|Im(w - z)| <= r2``."""

    center: complex
    r1: float
    r2: float

    def __post_init__(self):
        if not (self.r1 > 0 and self.r2 > 0):
            raise ValueError("half-widths must be positive")
        object.__setattr__(self, "center", complex(self.center))

    def contains(self, points) -> np.ndarray:
        d = np.asarray(points, dtype=np.complex128) - self.center
        return (np.abs(d.real) <= self.r1) & (np.abs(d.imag) <= self.r2)


@dataclass
class TransportResult:
    distance: float
    method: Method
    matching: np.ndarray  # matching[i] = index in the second measure paired with atom i
    bad_indices: list[int] = field(default_factory=list)

    @property
    def certified_upper_bound(self) -> bool:
        return self.method is Method.SQUARE


def _points(mu) -> np.ndarray:
    if isinstance(mu, EmpiricalMeasure):
        return mu.points
    return EmpiricalMeasure(mu).points


def limit_measure_samples(symbol: ToeplitzSymbol, N: int) -> EmpiricalMeasure:
    """Uniform measure on ``f(omega_N^j)``, ``j = 0..N-1``."""
    return EmpiricalMeasure(symbol_samples(symbol, N))


def _mean_cost(x: np.ndarray, y: np.ndarray) -> float:
    return math.fsum(np.abs(x - y).tolist()) / x.size


def w1_exact(mu, nu, budget: int = EXACT_BUDGET) -> TransportResult:
    """Exact W1 between two uniform measures with the same number of atoms."""
    x, y = _points(mu), _points(nu)
    if x.size != y.size:
        raise ValueError(f"atom counts differ: {x.size} vs {y.size}")
    if x.size > budget:
        raise BudgetExceeded(f"{x.size} atoms exceeds the exact-solver budget {budget}")
    cost = np.abs(x[:, None] - y[None, :])
    rows, cols = linear_sum_assignment(cost)
    matching = np.empty(x.size, dtype=int)
    matching[rows] = cols
    return TransportResult(_mean_cost(x, y[matching]), Method.EXACT, matching)


def w1_uniform(mu, nu, budget: int = EXACT_BUDGET) -> TransportResult:
    """Exact W1 for uniform measures of possibly different sizes.

    Each measure is replicated to the least common multiple of the sizes,
    which leaves it unchanged as a measure.
    """
    x, y = _points(mu), _points(nu)
    L = math.lcm(x.size, y.size)
    return w1_exact(np.repeat(x, L // x.size), np.repeat(y, L // y.size), budget)


def recipe_half_side(symbol: ToeplitzSymbol, n: int, norm_cap: float) -> float:
    """Half the side ``2 sum|a_j| + 2 M + 1`` of the box holding both spectra."""
    return symbol.l1(n) + norm_cap + 0.5


def w1_square_pairing(mu, nu, side: float, half_side: float | None = None) -> TransportResult:
    """Upper bound on W1 by pairing atoms that share a square of the grid.

    The grid covers the square centered at 0 with the given half-side
    (enlarged to contain every atom), or, if ``half_side`` is None, the atoms'
    bounding box padded by 10%.  Atoms are paired within each square in index
    order; the leftovers ("bad" atoms) are then paired in index order.
    """
    if not side > 0:
        raise ValueError("side must be positive")
    x, y = _points(mu), _points(nu)
    if x.size != y.size:
        raise ValueError(f"atom counts differ: {x.size} vs {y.size}")
    both = np.concatenate([x, y])
    if half_side is None:
        lo_re, hi_re = both.real.min(), both.real.max()
        lo_im, hi_im = both.imag.min(), both.imag.max()
        pad = 0.1 * max(hi_re - lo_re, hi_im - lo_im, side)
        origin = complex(lo_re - pad, lo_im - pad)
    else:
        h = max(half_side, float(np.max(np.abs(both.real))), float(np.max(np.abs(both.imag))))
        origin = complex(-h, -h)

    def cells(p: np.ndarray) -> list[tuple[int, int]]:
        d = p - origin
        return list(zip(np.floor(d.real / side).astype(int).tolist(),
                        np.floor(d.imag / side).astype(int).tolist()))

    buckets: dict[tuple[int, int], list[int]] = {}
    for j, key in enumerate(cells(y)):
        buckets.setdefault(key, []).append(j)
    cursor: dict[tuple[int, int], int] = {}
    matching = np.full(x.size, -1, dtype=int)
    bad_x = []
    for i, key in enumerate(cells(x)):
        pool = buckets.get(key, ())
        k = cursor.get(key, 0)
        if k < len(pool):
            matching[i] = pool[k]
            cursor[key] = k + 1
        else:
            bad_x.append(i)
    used = np.zeros(y.size, dtype=bool)
    used[matching[matching >= 0]] = True
    bad_y = np.flatnonzero(~used)
    matching[bad_x] = bad_y
    return TransportResult(_mean_cost(x, y[matching]), Method.SQUARE, matching, bad_x)


def count_in_window(points, w: RectWindow) -> int:
    return int(np.count_nonzero(w.contains(points)))


def concentration_profile(symbol: ToeplitzSymbol, n: int, eps_prime: float, c0: float,
                          z_grid=None) -> int:
    """Largest number of symbol samples in a cross of two thin boxes.

    For each ``z`` the count is over the union of the boxes with half-widths
    ``(n^-eps', n^-(c0 eps'))`` and ``(n^-(c0 eps'), n^-eps')`` centered at ``z``.
    The grid defaults to the sample points themselves.
    """
    if not eps_prime > 0:
        raise ValueError("eps_prime must be positive")
    if c0 < 1:
        raise ValueError("c0 must be at least 1")
    pts = symbol_samples(symbol, n)
    grid = pts if z_grid is None else np.asarray(z_grid, dtype=np.complex128).ravel()
    wide, thin = float(n) ** (-eps_prime), float(n) ** (-c0 * eps_prime)
    best = 0
    for z in grid:
        d = pts - z
        ar, ai = np.abs(d.real), np.abs(d.imag)
        inside = ((ar <= wide) & (ai <= thin)) | ((ar <= thin) & (ai <= wide))
        best = max(best, int(np.count_nonzero(inside)))
    return best


@dataclass
class RateRow:
    n: int
    w1: float
    method: str
    noise_norm: float
    sigma_min: dict[str, float]
    error: str | None = None

    def as_dict(self) -> dict:
        return {"n": self.n, "w1": self.w1, "method": self.method, "noise_norm": self.noise_norm,
                "sigma_min": dict(self.sigma_min), "error": self.error}


@dataclass
class RateTable:
    rows: list[RateRow]

    @property
    def slope(self) -> float:
        """Least-squares slope of ``log W1`` against ``log n`` over the successful rows."""
        ok = [r for r in self.rows if r.error is None and r.w1 > 0]
        if len(ok) < 2:
            return math.nan
        ln = np.log([r.n for r in ok])
        lw = np.log([r.w1 for r in ok])
        return float(np.polyfit(ln, lw, 1)[0])

    def as_dict(self) -> dict:
        return {"rows": [r.as_dict() for r in self.rows], "slope": self.slope}


def rate_experiment(symbol: ToeplitzSymbol, spec: PerturbationSpec, n_list: Sequence[int],
                    rng: SeededRng, probes: Sequence[complex] = (), budget: int = EXACT_BUDGET,
                    side: float | None = None) -> RateTable:
    """W1 between the perturbed spectrum and the symbol samples, for each ``n``.

    Above ``budget`` atoms the square pairing with side ``n^-1/4`` (or ``side``)
    is used and the row is tagged as an upper bound.
    """
    rows = []
    for n in n_list:
        try:
            A = build_toeplitz(symbol, n)
            pert = apply_additive(A, spec, rng.trial(n))
            mu = esm(pert.matrix)
            lim = limit_measure_samples(symbol, n)
            if n <= budget:
                res = w1_exact(mu, lim, budget)
            else:
                res = w1_square_pairing(mu, lim, side or float(n) ** -0.25)
            smin = {f"{complex(z).real:g}{complex(z).imag:+g}j":
                    smallest_singular_value(pert.matrix - complex(z) * np.eye(n)) for z in probes}
            rows.append(RateRow(n, res.distance, res.method.value, pert.noise_norm, smin))
            log.info("n=%d W1=%.6g (%s)", n, res.distance, res.method.value)
        except (NumericalBackendError, ValueError) as exc:
            log.error("rate experiment failed at n=%d: %s", n, exc)
            rows.append(RateRow(n, math.nan, "", math.nan, {}, str(exc)))
    return RateTable(rows)
