"""Random and deterministic perturbation ensembles.

Sampling is a pure function of ``(spec, n, seed, stream)``: every draw builds a
fresh :class:`numpy.random.Generator` from a ``SeedSequence`` keyed on the pair,
so trials can run in any order or in parallel.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .linalg import as_matrix, spectral_norm

__all__ = [
    "Kind",
    "PerturbationSpec",
    "SeededRng",
    "Perturbed",
    "sample",
    "apply_additive",
    "apply_multiplicative",
    "haar_unitary",
    "sign_pattern",
]

log = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1


class Kind(str, enum.Enum):
    GINIBRE_REAL = "ginibre-real"
    GINIBRE_COMPLEX = "ginibre-complex"
    HEAVY_TAILED = "heavy-tailed"
    HAAR_UNITARY = "haar-unitary"
    SIGN = "sign"
    CORNER = "corner"
    MULTIPLICATIVE = "multiplicative"
    ZERO = "zero"


@dataclass(frozen=True)
class PerturbationSpec:
    """An ensemble ``E`` and the exponents of the scale ``n^(-alpha-gamma)``.

    ``epsilon`` is the corner value for ``Kind.CORNER``; ``signs`` an optional
    explicit ``+-1`` pattern for ``Kind.SIGN`` (random fair signs otherwise).
    Sign matrices already carry their ``n^-gamma`` factor, so the additive
    scale for them is 1.  ``Kind.MULTIPLICATIVE`` uses ``n^(-gamma-1/2)``.
    """

    kind: Kind
    gamma: float = 1.0
    alpha: float = 0.0
    epsilon: float = 1.0
    signs: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.signs is not None:
            s = np.asarray(self.signs, dtype=float)
            if not np.all(np.isin(s, (-1.0, 1.0))):
                raise ValueError("sign pattern entries must be +1 or -1")
            object.__setattr__(self, "signs", tuple(map(tuple, np.atleast_2d(s))))

    def scale(self, n: int) -> float:
        if self.kind is Kind.SIGN:
            return 1.0
        if self.kind is Kind.MULTIPLICATIVE:
            return float(n) ** (-self.gamma - 0.5)
        return float(n) ** (-self.alpha - self.gamma)


@dataclass(frozen=True)
class SeededRng:
    """A ``(seed, stream)`` pair; identical pairs reproduce identical draws."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "stream", int(self.stream) & _MASK64)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, self.stream])))

    def trial(self, index: int) -> "SeededRng":
        """Stream for trial ``index``: ``seed XOR index``."""
        return SeededRng(self.seed, self.seed ^ int(index))


class Perturbed(NamedTuple):
    matrix: np.ndarray
    noise_norm: float
    scale: float
    alpha_ratio: float  # realized ||E|| / n^alpha


def haar_unitary(n: int, gen: np.random.Generator) -> np.ndarray:
    Z = (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    phase = np.where(d == 0, 1.0, np.conj(d) / np.abs(d))
    return Q * phase[None, :]


def _signs(spec: PerturbationSpec, n: int, gen: np.random.Generator) -> np.ndarray:
    if spec.signs is not None:
        s = np.asarray(spec.signs, dtype=float)
        if s.shape != (n, n):
            raise ValueError(f"sign pattern has shape {s.shape}, expected {(n, n)}")
        return s
    return np.where(gen.random((n, n)) < 0.5, -1.0, 1.0)


def sample(spec: PerturbationSpec, n: int, rng: SeededRng) -> np.ndarray:
    """Draw the unscaled ensemble matrix ``E`` (sign matrices come pre-scaled)."""
    if n < 1:
        raise ValueError("n must be positive")
    gen = rng.generator()
    kind = spec.kind
    if kind in (Kind.GINIBRE_REAL, Kind.MULTIPLICATIVE):
        E = gen.standard_normal((n, n))
    elif kind is Kind.GINIBRE_COMPLEX:
        E = (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / np.sqrt(2.0)
    elif kind is Kind.HEAVY_TAILED:
        U = 1.0 - gen.random((n, n))  # uniform on (0, 1]
        E = U ** -0.5
    elif kind is Kind.HAAR_UNITARY:
        E = haar_unitary(n, gen)
    elif kind is Kind.SIGN:
        E = _signs(spec, n, gen) * float(n) ** (-spec.gamma)
    elif kind is Kind.CORNER:
        E = np.zeros((n, n))
        E[n - 1, 0] = spec.epsilon
    elif kind is Kind.ZERO:
        E = np.zeros((n, n))
    else:  # pragma: no cover
        raise ValueError(f"unknown kind {kind}")
    return np.asarray(E, dtype=np.complex128)


def apply_additive(A, spec: PerturbationSpec, rng: SeededRng) -> Perturbed:
    """``A + n^(-alpha-gamma) E`` together with the realized ``||E||``."""
    A = as_matrix(A)
    n = A.shape[0]
    E = sample(spec, n, rng)
    s = spec.scale(n)
    e_norm = spectral_norm(E) if np.any(E) else 0.0
    ratio = e_norm / float(n) ** spec.alpha
    log.debug("kind=%s n=%d ||E||=%.6g ||E||/n^alpha=%.6g", spec.kind.value, n, e_norm, ratio)
    return Perturbed(A + s * E, e_norm, s, ratio)


def apply_multiplicative(A, gamma: float, rng: SeededRng | None = None,
                         e_prime: np.ndarray | None = None) -> Perturbed:
    """``A (I + n^(-gamma-1/2) E')`` with ``E'`` real Ginibre.

    Passing ``e_prime`` bypasses sampling (used to inject a fixed matrix).
    """
    A = as_matrix(A)
    n = A.shape[0]
    if gamma <= 1:
        log.warning("multiplicative perturbation with gamma=%g <= 1 is outside the proven regime", gamma)
    if e_prime is None:
        if rng is None:
            raise ValueError("need either rng or e_prime")
        e_prime = sample(PerturbationSpec(Kind.MULTIPLICATIVE, gamma=gamma), n, rng)
    E = as_matrix(e_prime)
    s = float(n) ** (-gamma - 0.5)
    e_norm = spectral_norm(E) if np.any(E) else 0.0
    return Perturbed(A @ (np.eye(n) + s * E), e_norm, s, e_norm / np.sqrt(n))


def sign_pattern(n: int, rng: SeededRng) -> np.ndarray:
    """A fair random ``+-1`` pattern (exposed for audits that need the raw signs)."""
    return np.where(rng.generator().random((n, n)) < 0.5, -1.0, 1.0)
