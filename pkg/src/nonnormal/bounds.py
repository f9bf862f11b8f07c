"""Evaluators for the explicit deterministic bounds.

Each evaluator returns the measured quantity next to the bound and a flag
saying whether the bound's hypotheses hold on that instance.  Instances with
failed hypotheses are reported but never asserted, so sweeps over ``z`` grids
that cross the spectrum keep running.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .builders import JordanSpec, ToeplitzSymbol, build_jordan, build_shift, build_toeplitz, companion
from .linalg import (
    DEFAULT_TOLERANCES,
    Tolerances,
    as_matrix,
    numerical_rank,
    singular_values,
    smallest_singular_value,
    spectral_norm,
)
from .perturbations import Kind, PerturbationSpec, SeededRng, apply_additive, apply_multiplicative, sign_pattern

__all__ = [
    "ComparisonReport",
    "ChainReport",
    "JordanCase",
    "JordanBoundReport",
    "InterlaceBounds",
    "SignAuditReport",
    "norm_comparison",
    "rank_comparison",
    "weyl_gap",
    "toeplitz_chain_report",
    "jordan_interlace_bounds",
    "jordan_corner_case",
    "jordan_corner_smin_bound",
    "sign_perturbation_smin_audit",
    "SIGN_SMIN_CONSTANT",
    "geometric_singular_vector",
    "geometric_residual",
    "zn_small_check",
    "toeplitz_norm_audit",
    "ginibre_norm_tail_audit",
    "multiplicative_lsv_audit",
    "norm_lsv_audits",
]

SIGN_SMIN_CONSTANT = 0.15


def _shifted_sv(M: np.ndarray, z: complex) -> np.ndarray:
    return singular_values(M - complex(z) * np.eye(M.shape[0]))


def _potential_from_sv(s: np.ndarray) -> float:
    if np.any(s == 0.0):
        return -math.inf
    return float(np.sum(np.log(s)) / s.size)


@dataclass
class ComparisonReport:
    """Bound-versus-truth record for one comparison-principle instance."""

    lhs: float
    rhs: float
    hypotheses: dict[str, bool]
    inputs: dict[str, float]
    rhs_sharp: float | None = None
    tolerances: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)

    @property
    def hypotheses_ok(self) -> bool:
        return all(self.hypotheses.values())

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def slack_sharp(self) -> float | None:
        return None if self.rhs_sharp is None else self.rhs_sharp - self.lhs

    def _allowed(self, rhs: float) -> float:
        return self.tolerances.slack_atol * max(1.0, abs(rhs))

    @property
    def violated(self) -> bool:
        """True when hypotheses hold but the bound fails beyond tolerance."""
        if not self.hypotheses_ok:
            return False
        if self.slack < -self._allowed(self.rhs):
            return True
        return self.rhs_sharp is not None and self.slack_sharp < -self._allowed(self.rhs_sharp)

    def as_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "rhs_sharp": self.rhs_sharp,
            "slack": self.slack,
            "slack_sharp": self.slack_sharp,
            "hypotheses_ok": self.hypotheses_ok,
            "hypotheses": dict(self.hypotheses),
            "inputs": dict(self.inputs),
            "violated": self.violated,
        }


def norm_comparison(M1, M2, z: complex, eps: float,
                    tol: Tolerances = DEFAULT_TOLERANCES) -> ComparisonReport:
    """``|L_{M1}(z) - L_{M2}(z)|`` against the norm comparison bound.

    ``rhs``       = ``6(|log(eps/2)| + |log s|) nu + (2/eps) ||M1 - M2||``
    ``rhs_sharp`` = ``(6|log(eps/2)| + 4|log s|) nu + (2/eps) ||M1 - M2||``

    with ``s`` the smaller of the two least singular values of ``M_i - zI`` and
    ``nu`` the fraction of singular values of ``M2 - zI`` in ``[0, eps]``.
    """
    A1, A2 = as_matrix(M1), as_matrix(M2)
    if A1.shape != A2.shape:
        raise ValueError("matrices must have the same shape")
    n = A1.shape[0]
    s1, s2 = _shifted_sv(A1, z), _shifted_sv(A2, z)
    smin = float(min(s1[-1], s2[-1]))
    delta = spectral_norm(A1 - A2) if np.any(A1 != A2) else 0.0
    nu = float(np.count_nonzero(s2 <= eps)) / n
    hyp = {
        "eps_in_range": 0.0 < eps < 0.5,
        "sigma_min_positive": smin > 0.0,
        "perturbation_small": delta < eps / 2,
    }
    inputs = {"z_re": complex(z).real, "z_im": complex(z).imag, "eps": eps,
              "sigma_min": smin, "nu": nu, "delta_norm": delta, "n": n}
    if not (hyp["eps_in_range"] and hyp["sigma_min_positive"]):
        return ComparisonReport(math.nan, math.inf, hyp, inputs, math.inf, tol)
    lhs = abs(_potential_from_sv(s1) - _potential_from_sv(s2))
    la, ls = abs(math.log(eps / 2)), abs(math.log(smin))
    tail = 2.0 / eps * delta
    rhs = 6 * (la + ls) * nu + tail
    rhs_sharp = (6 * la + 4 * ls) * nu + tail
    return ComparisonReport(lhs, rhs, hyp, inputs, rhs_sharp, tol)


def rank_comparison(M1, M2, z: complex, tol: Tolerances = DEFAULT_TOLERANCES) -> ComparisonReport:
    """``|L_{M1}(z) - L_{M2}(z)|`` against ``2(|log s_min| + |log s_max|) rank(M1 - M2) / n``."""
    A1, A2 = as_matrix(M1), as_matrix(M2)
    if A1.shape != A2.shape:
        raise ValueError("matrices must have the same shape")
    n = A1.shape[0]
    s1, s2 = _shifted_sv(A1, z), _shifted_sv(A2, z)
    smin = float(min(s1[-1], s2[-1]))
    smax = float(max(s1[0], s2[0]))
    D = A1 - A2
    rank = numerical_rank(D, tol.rank_rtol) if np.any(D) else 0
    hyp = {"sigma_min_positive": smin > 0.0}
    inputs = {"z_re": complex(z).real, "z_im": complex(z).imag, "sigma_min": smin,
              "sigma_max": smax, "rank": rank, "n": n}
    if not hyp["sigma_min_positive"]:
        return ComparisonReport(math.nan, math.inf, hyp, inputs, None, tol)
    lhs = abs(_potential_from_sv(s1) - _potential_from_sv(s2))
    rhs = 2 * (abs(math.log(smin)) + abs(math.log(smax))) * rank / n
    return ComparisonReport(lhs, rhs, hyp, inputs, None, tol)


def weyl_gap(M1, M2) -> tuple[float, float]:
    """``(max_j |s_j(M1) - s_j(M2)|, ||M1 - M2||)``; the first never exceeds the second."""
    A1, A2 = as_matrix(M1), as_matrix(M2)
    if A1.shape != A2.shape:
        raise ValueError("matrices must have the same shape")
    gap = float(np.max(np.abs(singular_values(A1) - singular_values(A2))))
    D = A1 - A2
    return gap, (spectral_norm(D) if np.any(D) else 0.0)


@dataclass
class ChainReport:
    """Toeplitz to circulant comparison chain ``A + sE -> A + A' + sE -> A + A'``."""

    rank_link: ComparisonReport
    norm_link: ComparisonReport
    end_to_end: float
    noise_norm: float
    scale: float

    @property
    def summed_bound(self) -> float:
        return self.rank_link.rhs + self.norm_link.rhs

    @property
    def hypotheses_ok(self) -> bool:
        return self.rank_link.hypotheses_ok and self.norm_link.hypotheses_ok

    @property
    def violated(self) -> bool:
        if self.rank_link.violated or self.norm_link.violated:
            return True
        if not self.hypotheses_ok:
            return False
        allowed = self.rank_link.tolerances.slack_atol * max(1.0, abs(self.summed_bound))
        return self.end_to_end > self.summed_bound + allowed

    def as_dict(self) -> dict:
        return {
            "rank_link": self.rank_link.as_dict(),
            "norm_link": self.norm_link.as_dict(),
            "end_to_end": self.end_to_end,
            "summed_bound": self.summed_bound,
            "noise_norm": self.noise_norm,
            "scale": self.scale,
            "hypotheses_ok": self.hypotheses_ok,
            "violated": self.violated,
        }


def toeplitz_chain_report(symbol: ToeplitzSymbol, n: int, spec: PerturbationSpec, z: complex,
                          eps: float, rng: SeededRng,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> ChainReport:
    """Evaluate both comparison links for one draw of ``E`` (requires ``k_n < n/2``)."""
    A = build_toeplitz(symbol, n)
    Ap = companion(symbol, n)
    pert = apply_additive(A, spec, rng)
    noise = pert.matrix - A
    perturbed = pert.matrix
    circ_perturbed = A + Ap + noise
    circ = A + Ap
    rank_link = rank_comparison(perturbed, circ_perturbed, z, tol)
    norm_link = norm_comparison(circ_perturbed, circ, z, eps, tol)
    L1 = _potential_from_sv(_shifted_sv(perturbed, z))
    L2 = _potential_from_sv(_shifted_sv(circ, z))
    end = abs(L1 - L2) if math.isfinite(L1) and math.isfinite(L2) else math.nan
    return ChainReport(rank_link, norm_link, end, pert.noise_norm, pert.scale)


class InterlaceBounds(NamedTuple):
    lower: float
    upper: float
    gram_eigs: np.ndarray


def jordan_interlace_bounds(m: int, c: complex, z: complex) -> InterlaceBounds:
    """Bounds on the top ``m - 1`` singular values of ``B - zI`` for an ``m x m`` Jordan block.

    ``gram_eigs`` are the eigenvalues ``|c-z|^2 + 1 + 2|c-z| cos(k pi / m)``,
    ``k = 1..m-1``, of ``A' A'^*`` where ``A'`` is the first ``m - 1`` rows.
    """
    if m < 2:
        raise ValueError("need m >= 2")
    d = abs(complex(c) - complex(z))
    k = np.arange(1, m)
    gram = d * d + 1.0 + 2.0 * d * np.cos(k * np.pi / m)
    return InterlaceBounds(abs(d - 1.0), d + 1.0, np.sort(gram)[::-1])


class JordanCase(str, enum.Enum):
    SUBCRITICAL_LARGE_EPS = "subcritical-large-eps"
    SUBCRITICAL_SMALL_EPS = "subcritical-small-eps"
    SUPERCRITICAL = "supercritical"


@dataclass
class JordanBoundReport:
    case: JordanCase | None
    bound: float
    measured_sigma_min: float
    m: int
    c: complex
    z: complex
    eps: float

    @property
    def violated(self) -> bool:
        return self.case is not None and self.measured_sigma_min < self.bound - 1e-12

    def as_dict(self) -> dict:
        return {"case": None if self.case is None else self.case.value, "bound": self.bound,
                "measured_sigma_min": self.measured_sigma_min, "m": self.m,
                "c": [self.c.real, self.c.imag], "z": [self.z.real, self.z.imag],
                "eps": self.eps, "violated": self.violated}


# The small-eps case uses +8 under the root, which is what |eps - w| >= |w|/2
# gives; a tighter constant would need a sharper estimate of that term.
_CASE2_CONSTANT = 8.0


def jordan_corner_case(m: int, r: float, eps: float) -> JordanCase | None:
    """Which case of the corner lower bound applies for ``r = |z - c|``."""
    # compare r^m in the log domain so large m cannot underflow to a wrong answer
    log_rm = m * math.log(r) if r > 0 else -math.inf
    log_eps = math.log(eps) if eps > 0 else -math.inf
    if r < 1:
        if log_rm + math.log(2) < log_eps:
            return JordanCase.SUBCRITICAL_LARGE_EPS
        if log_eps < log_rm - math.log(2):
            return JordanCase.SUBCRITICAL_SMALL_EPS
    elif r > 1 and log_eps < log_rm - math.log(2):
        return JordanCase.SUPERCRITICAL
    return None


def _corner_bound(case: JordanCase, m: int, r: float, eps: float) -> float:
    if case is JordanCase.SUBCRITICAL_LARGE_EPS:
        return eps * (1 - r) ** 1.5 / math.sqrt(2 * m * eps**2 + 8)
    if case is JordanCase.SUBCRITICAL_SMALL_EPS:
        rm = r**m
        return rm * (1 - r) ** 1.5 / math.sqrt(2 * m * rm**2 + _CASE2_CONSTANT)
    q = r * r - 1
    return abs(r - 1) * math.sqrt(q) / math.sqrt(2 * m * q + 8 * eps**2)


def jordan_corner_smin_bound(m: int, c: complex, z: complex, eps: float) -> JordanBoundReport:
    """Lower bound on ``s_min(B - zI + E)`` for a Jordan block with corner ``eps`` at ``(m, 1)``."""
    if m < 1:
        raise ValueError("m must be positive")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    c, z = complex(c), complex(z)
    r = abs(z - c)
    M = build_jordan(JordanSpec([(m, c)], [eps])) - z * np.eye(m)
    measured = smallest_singular_value(M)
    case = jordan_corner_case(m, r, eps)
    bound = _corner_bound(case, m, r, eps) if case is not None else math.nan
    return JordanBoundReport(case, bound, measured, m, c, z, float(eps))


@dataclass
class SignAuditReport:
    n: int
    gamma: float
    z: complex
    bound: float
    measured: float
    preconditions_ok: bool

    @property
    def violated(self) -> bool:
        return self.preconditions_ok and self.measured < self.bound


def sign_perturbation_smin_audit(n: int, gamma: float, z: complex, rng: SeededRng | None = None,
                                 signs=None) -> SignAuditReport:
    """``s_min(T + R - zI)`` against ``0.15 n^-gamma`` for ``R`` with entries ``+-n^-gamma``.

    Outside ``gamma >= 5``, ``n >= gamma^2``, ``|z| <= 1/4`` the result is a
    diagnostic and never counts as a violation.
    """
    if signs is None:
        if rng is None:
            raise ValueError("need rng or explicit signs")
        S = sign_pattern(n, rng)
    else:
        S = np.asarray(signs, dtype=float)
        if S.shape != (n, n) or not np.all(np.isin(S, (-1.0, 1.0))):
            raise ValueError("signs must be an n x n array of +-1")
    z = complex(z)
    M = build_shift(n) + S * float(n) ** (-gamma) - z * np.eye(n)
    pre = gamma >= 5 and n >= gamma * gamma and abs(z) <= 0.25
    return SignAuditReport(n, gamma, z, SIGN_SMIN_CONSTANT * float(n) ** (-gamma),
                           smallest_singular_value(M), pre)


def geometric_singular_vector(z: complex, n: int) -> np.ndarray:
    """Unit null-direction ``(1, z, ..., z^{n-1}) / norm`` of all but the last row of ``T - zI``."""
    z = complex(z)
    v = z ** np.arange(n)
    return v / np.linalg.norm(v)


def geometric_residual(z: complex, n: int) -> float:
    """Closed form of ``||(T - zI) v0||``: ``|z|^n sqrt((1 - |z|^2) / (1 - |z|^{2n}))``."""
    a = abs(complex(z))
    if a == 1.0:
        return 1.0 / math.sqrt(n)
    return a**n * math.sqrt((1 - a * a) / (1 - a ** (2 * n)))


def zn_small_check(z: complex, n: int, gamma: float) -> bool:
    """``|z|^{n-1} < n^-gamma`` evaluated as ``(n-1) log|z| < -gamma log n``.

    Returns ``False`` (diagnostic) when ``|z| <= 1/4``, ``gamma >= 5``,
    ``n >= gamma^2`` do not all hold.
    """
    a = abs(complex(z))
    if not (a <= 0.25 and gamma >= 5 and n >= gamma * gamma):
        return False
    if a == 0.0:
        return True
    return (n - 1) * math.log(a) < -gamma * math.log(n)


def toeplitz_norm_audit(symbol: ToeplitzSymbol, n: int) -> dict:
    A = build_toeplitz(symbol, n)
    norm = spectral_norm(A) if np.any(A) else 0.0
    bound = symbol.l1(n)
    return {"n": n, "norm": norm, "bound": bound, "slack": bound - norm,
            "violated": bound - norm < -1e-10 * max(1.0, bound)}


def ginibre_norm_tail_audit(n_list: Sequence[int], alpha: float, trials: int, rng: SeededRng,
                            kind: Kind = Kind.GINIBRE_REAL) -> dict:
    """Frequency of ``||E|| >= n^alpha`` per ``n``, beside the reference rate ``n^{1/2 - alpha}``."""
    rows = []
    spec = PerturbationSpec(kind, gamma=1.0, alpha=alpha)
    for n in n_list:
        hits = 0
        for t in range(trials):
            pert = apply_additive(np.zeros((n, n)), spec, rng.trial(n * 100003 + t))
            hits += pert.noise_norm >= float(n) ** alpha
        rows.append({"n": int(n), "frequency": hits / trials, "reference": float(n) ** (0.5 - alpha)})
    return {"alpha": alpha, "trials": trials, "rows": rows}


def multiplicative_lsv_audit(symbol: ToeplitzSymbol, n: int, gamma: float, kappa: float,
                             probes: Sequence[complex], seeds: int, rng: SeededRng) -> dict:
    """Count draws with ``s_min(A(I + n^{-1/2-gamma} E') - zI) <= n^-kappa`` at non-zero probes."""
    if any(complex(z) == 0 for z in probes):
        raise ValueError("probes must be non-zero")
    A = build_toeplitz(symbol, n)
    threshold = float(n) ** (-kappa)
    failures = 0
    smallest = math.inf
    for t in range(seeds):
        M = apply_multiplicative(A, gamma, rng.trial(t)).matrix
        for z in probes:
            s = smallest_singular_value(M - complex(z) * np.eye(n))
            smallest = min(smallest, s)
            failures += s <= threshold
    return {"n": n, "gamma": gamma, "kappa": kappa, "threshold": threshold, "seeds": seeds,
            "probes": len(probes), "failures": int(failures), "min_sigma": smallest}


def norm_lsv_audits(symbol: ToeplitzSymbol, n: int, rng: SeededRng, *, gamma: float = 3.0,
                    kappa: float = 4.0, probes: Sequence[complex] = (0.5, 0.5j, 2.0 + 1.0j, 3.0),
                    seeds: int = 50, tail_alpha: float = 0.75,
                    tail_n: Sequence[int] = (16, 32, 64), tail_trials: int = 50) -> dict:
    """Toeplitz norm bound, Ginibre norm tail and multiplicative least-singular-value audits together.

    The default probes stay clear of the pseudospectrum; probes inside it
    (e.g. ``z = -1`` for the zoo-c symbol) can fail any fixed ``kappa``.
    """
    return {
        "toeplitz_norm": toeplitz_norm_audit(symbol, n),
        "ginibre_norm_tail": ginibre_norm_tail_audit(tail_n, tail_alpha, tail_trials, rng),
        "multiplicative_lsv": multiplicative_lsv_audit(symbol, n, gamma, kappa, probes, seeds, rng),
    }
