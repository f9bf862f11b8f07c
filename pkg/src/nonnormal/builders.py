"""Deterministic matrix families: banded Toeplitz, circulant, shift, Jordan.

A Toeplitz symbol is a sparse ``offset -> coefficient`` map together with a
bandwidth rule.  ``A[i, j] = a[i - j]`` whenever ``|i - j| <= k_n``, so negative
offsets live above the diagonal (the shift ``T`` is the symbol ``{-1: 1}``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .linalg import DEFAULT_TOLERANCES

__all__ = [
    "FixedBandwidth",
    "PowerBandwidth",
    "ToeplitzSymbol",
    "JordanSpec",
    "build_toeplitz",
    "build_shift",
    "build_circulant",
    "circulant_eigenvalues",
    "circulant_generators",
    "companion",
    "scaled_companion",
    "build_jordan",
    "symbol_eval",
    "symbol_samples",
    "roots_of_unity",
]

FFT_THRESHOLD = 512


@dataclass(frozen=True)
class FixedBandwidth:
    k: int

    def __call__(self, n: int) -> int:
        return self.k


@dataclass(frozen=True)
class PowerBandwidth:
    """``k_n = floor(n**theta) - offset``, clipped at zero."""

    theta: float
    offset: int = 0

    def __call__(self, n: int) -> int:
        # guard against floor(1000**(1/3)) == 9
        root = math.floor(n**self.theta + 1e-9)
        return max(0, root - self.offset)


BandwidthRule = Union[FixedBandwidth, PowerBandwidth, Callable[[int], int]]


@dataclass(frozen=True)
class ToeplitzSymbol:
    """Finitely supported coefficients ``a_j`` plus a truncation rule.

    With ``bandwidth=None`` the truncation is the largest offset in the support.
    """

    coeffs: Mapping[int, complex]
    bandwidth: BandwidthRule | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        clean = {int(j): complex(a) for j, a in self.coeffs.items() if complex(a) != 0}
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @property
    def support_width(self) -> int:
        return max((abs(j) for j in self.coeffs), default=0)

    def k(self, n: int) -> int:
        if self.bandwidth is None:
            return self.support_width
        k = int(self.bandwidth(n))
        if k < 0:
            raise ValueError(f"bandwidth rule gave k_n={k} < 0 at n={n}")
        return k

    def truncated(self, n: int) -> dict[int, complex]:
        k = self.k(n)
        return {j: a for j, a in self.coeffs.items() if abs(j) <= k}

    def l1(self, n: int) -> float:
        """``sum_{|j|<=k_n} |a_j|``, the spectral-norm bound of the Toeplitz matrix."""
        return float(sum(abs(a) for a in self.truncated(n).values()))

    def l2_squared(self, n: int) -> float:
        return float(sum(abs(a) ** 2 for a in self.truncated(n).values()))

    def first_moment(self, n: int) -> float:
        """``sum |j a_j|`` over the truncated support."""
        return float(sum(abs(j * a) for j, a in self.truncated(n).items()))


@dataclass(frozen=True)
class JordanSpec:
    """Block sizes ``m_i``, eigenvalues ``c_i`` and optional corner entries ``eps_i``."""

    blocks: Sequence[tuple[int, complex]]
    corners: Sequence[float] | None = None

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("JordanSpec needs at least one block")
        for m, _ in self.blocks:
            if int(m) < 1:
                raise ValueError(f"block size must be positive, got {m}")
        if self.corners is not None:
            if len(self.corners) != len(self.blocks):
                raise ValueError("one corner entry per block required")
            if any(e < 0 for e in self.corners):
                raise ValueError("corner entries must be non-negative")

    @property
    def n(self) -> int:
        return sum(int(m) for m, _ in self.blocks)


def build_toeplitz(symbol: ToeplitzSymbol, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be positive")
    A = np.zeros((n, n), dtype=np.complex128)
    for j, a in symbol.truncated(n).items():
        if abs(j) < n:
            # offset j = i - col, i.e. numpy diagonal -j
            A += np.diag(np.full(n - abs(j), a), -j)
    return A


def build_shift(n: int) -> np.ndarray:
    """The nilpotent upshift: ones on the superdiagonal."""
    return build_toeplitz(ToeplitzSymbol({-1: 1.0}), n)


def build_circulant(c) -> np.ndarray:
    """``C[i, j] = c[(i - j) mod n]``."""
    c = np.asarray(c, dtype=np.complex128).ravel()
    if c.size == 0:
        raise ValueError("need at least one generator")
    n = c.size
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return c[idx]


def roots_of_unity(n: int) -> np.ndarray:
    """``omega_n ** j`` for ``j = 0..n-1`` with ``omega_n = exp(2 pi i / n)``."""
    return np.exp(2j * np.pi * np.arange(n) / n)


def circulant_eigenvalues(c) -> np.ndarray:
    """Eigenvalues ``lambda_j = sum_k c_{-k mod n} omega_n^{jk}``, in index order ``j``.

    Evaluated as a dense sum for small ``n`` and through the FFT above
    ``FFT_THRESHOLD``; both give the same values.
    """
    c = np.asarray(c, dtype=np.complex128).ravel()
    n = c.size
    if n == 0:
        raise ValueError("need at least one generator")
    if n >= FFT_THRESHOLD:
        return np.fft.fft(c)
    k = np.arange(n)
    reversed_c = c[(-k) % n]
    # reduce exponents mod n before exponentiating to keep phases accurate
    W = np.exp(2j * np.pi * ((np.outer(k, k) % n) / n))
    return W @ reversed_c


def circulant_generators(symbol: ToeplitzSymbol, n: int) -> np.ndarray:
    """Generators of the circulant completion ``C = A + A'``."""
    k = symbol.k(n)
    if not k < n / 2:
        raise ValueError(f"companion needs k_n < n/2, got k_n={k}, n={n}")
    c = np.zeros(n, dtype=np.complex128)
    for j, a in symbol.truncated(n).items():
        c[j % n] = a
    return c


def companion(symbol: ToeplitzSymbol, n: int) -> np.ndarray:
    """The low-rank ``A'`` making ``build_toeplitz(symbol, n) + A'`` circulant.

    ``rank(A') <= 2 k_n`` and ``||A'||_F^2 <= n sum |a_j|^2``.
    """
    c = circulant_generators(symbol, n)
    A_prime = build_circulant(c) - build_toeplitz(symbol, n)
    # entries inside the band cancel exactly; clear signed zeros / roundoff
    A_prime[np.abs(A_prime) == 0] = 0
    return A_prime


def scaled_companion(symbol: ToeplitzSymbol, n: int, gamma: float) -> np.ndarray:
    return n ** (-float(gamma)) * companion(symbol, n)


def build_jordan(spec: JordanSpec) -> np.ndarray:
    n = spec.n
    M = np.zeros((n, n), dtype=np.complex128)
    corners = spec.corners or [0.0] * len(spec.blocks)
    start = 0
    for (m, c), eps in zip(spec.blocks, corners):
        m = int(m)
        stop = start + m
        M[start:stop, start:stop] = np.diag(np.full(m, complex(c))) + np.diag(np.ones(m - 1), 1)
        if eps:
            M[stop - 1, start] += eps
        start = stop
    return M


def symbol_eval(symbol: ToeplitzSymbol, omega, n: int | None = None,
                tol: float = DEFAULT_TOLERANCES.unit_modulus):
    """``f(omega) = sum_{|j| <= k} a_j omega^j`` for unit-modulus ``omega``.

    ``n`` selects the truncation ``k_n``; by default the whole support is used.
    """
    w = np.asarray(omega, dtype=np.complex128)
    if np.any(np.abs(np.abs(w) - 1.0) > tol):
        raise ValueError("symbol is only evaluated on the unit circle")
    coeffs = symbol.coeffs if n is None else symbol.truncated(n)
    out = np.zeros_like(w)
    for j, a in coeffs.items():
        out = out + a * w**j
    return out if out.ndim else complex(out)


def symbol_samples(symbol: ToeplitzSymbol, N: int, n: int | None = None) -> np.ndarray:
    """``f(omega_N^j)`` for ``j = 0..N-1``; truncation at ``k_n`` with ``n`` defaulting to ``N``."""
    if N < 1:
        raise ValueError("N must be positive")
    n = N if n is None else n
    j = np.arange(N)
    out = np.zeros(N, dtype=np.complex128)
    for p, a in symbol.truncated(n).items():
        # exact phases: reduce p*j mod N before the exponential
        out += a * np.exp(2j * np.pi * (((p * j) % N) / N))
    return out
