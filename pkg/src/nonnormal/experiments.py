"""Experiment pipelines behind the command-line runner.

Each ``run_*`` function takes a resolved config and returns an
:class:`Outcome`: named eigenvalue series for the CSV/SVG outputs, a metrics
mapping for the summary, and the number of hard assertion failures.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

import numpy as np

from .bounds import (
    jordan_corner_case,
    jordan_corner_smin_bound,
    ginibre_norm_tail_audit,
    jordan_interlace_bounds,
    multiplicative_lsv_audit,
    norm_comparison,
    rank_comparison,
    sign_perturbation_smin_audit,
    toeplitz_chain_report,
    toeplitz_norm_audit,
    weyl_gap,
    zn_small_check,
)
from .builders import (
    JordanSpec,
    ToeplitzSymbol,
    build_jordan,
    build_shift,
    build_toeplitz,
    scaled_companion,
    symbol_samples,
)
from .config import (
    PRESETS,
    complex_from_config,
    perturbation_from_config,
    resolve,
    symbol_from_config,
)
from .linalg import Tolerances, canonical_order, eigenvalues, spectral_norm
from .perturbations import Kind, PerturbationSpec, SeededRng, apply_additive, apply_multiplicative, sign_pattern
from .potential import BumpTestFunction, esm, integrate_esm, mc_error_bound, mc_replacement, replacement_constants
from .transport import EXACT_BUDGET, RateTable, rate_experiment, w1_exact, w1_square_pairing

__all__ = ["Outcome", "run", "SIGN_Z_GRID"]

log = logging.getLogger(__name__)

EPS_CAP = 4.0

# nine probes in |z| <= 1/4
SIGN_Z_GRID = (0.0, 0.2, -0.2, 0.2j, -0.2j, 0.15 + 0.15j, 0.15 - 0.15j, -0.15 + 0.15j, -0.15 - 0.15j)


@dataclass
class Outcome:
    series: dict[str, np.ndarray] = field(default_factory=dict)
    metrics: dict[str, Any] = field(default_factory=dict)
    violations: int = 0
    tables: dict[str, list[dict]] = field(default_factory=dict)
    panels: dict[str, "Outcome"] = field(default_factory=dict)


def _pmap(fn: Callable, items: Iterable, jobs: int) -> list:
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _w1(a: np.ndarray, b: np.ndarray) -> dict:
    if a.size <= EXACT_BUDGET:
        res = w1_exact(a, b)
    else:
        res = w1_square_pairing(a, b, a.size ** -0.25)
    return {"distance": res.distance, "method": res.method.value,
            "certified_upper_bound": res.certified_upper_bound}


def _perturb(A: np.ndarray, spec: PerturbationSpec, rng: SeededRng):
    if spec.kind is Kind.MULTIPLICATIVE:
        return apply_multiplicative(A, spec.gamma, rng)
    return apply_additive(A, spec, rng)


def _circulant_series(symbol: ToeplitzSymbol, n: int) -> np.ndarray | None:
    if not symbol.k(n) < n / 2:
        return None
    return canonical_order(symbol_samples(symbol, n))


def run_spectrum(cfg: dict, tol: Tolerances, jobs: int = 1, with_circulant: bool = False) -> Outcome:
    symbol = symbol_from_config(cfg.get("symbol", {"coeffs": {"0": 0}}))
    spec = perturbation_from_config(cfg["perturbation"])
    n = cfg["n"]
    A = build_toeplitz(symbol, n)
    pert = _perturb(A, spec, SeededRng(cfg["seed"]))
    lam = eigenvalues(pert.matrix)
    out = Outcome(series={"perturbed": lam})
    out.metrics = {"n": n, "k_n": symbol.k(n), "noise_norm": pert.noise_norm, "noise_scale": pert.scale,
                   "noise_norm_over_n_alpha": pert.alpha_ratio}
    circ = _circulant_series(symbol, n)
    if circ is not None:
        out.metrics["w1_perturbed_circulant"] = _w1(lam, circ)
        if with_circulant:
            out.series["circulant"] = circ
    return out


def run_figure_zoo(cfg: dict, tol: Tolerances, jobs: int = 1) -> Outcome:
    out = Outcome()
    for name in cfg["panels"]:
        if name not in PRESETS or PRESETS[name]["experiment"] != "spectrum":
            raise ValueError(f"{name!r} is not a spectrum preset")
        panel_cfg = resolve("spectrum", {"preset": name}, seed=cfg["seed"])
        if "n" in cfg:
            panel_cfg["n"] = cfg["n"]
        panel = run_spectrum(panel_cfg, tol, jobs, with_circulant=True)
        out.panels[name] = panel
        out.metrics[name] = panel.metrics
    return out


def run_figure_growing(cfg: dict, tol: Tolerances, jobs: int = 1) -> Outcome:
    out = run_spectrum(cfg, tol, jobs, with_circulant=True)
    symbol = symbol_from_config(cfg["symbol"])
    spec = perturbation_from_config(cfg["perturbation"])
    chains = []
    for z in cfg.get("probes", []):
        rep = toeplitz_chain_report(symbol, cfg["n"], spec, complex_from_config(z), cfg.get("eps", 0.25),
                                    SeededRng(cfg["seed"]), tol)
        chains.append(rep.as_dict())
        out.violations += rep.violated
    out.metrics["chain_reports"] = chains
    return out


def run_figure_star(cfg: dict, tol: Tolerances, jobs: int = 1) -> Outcome:
    out = run_spectrum(cfg, tol, jobs, with_circulant=True)
    symbol = symbol_from_config(cfg["symbol"])
    n = cfg["n"]
    gamma = cfg["perturbation"].get("gamma", 2)
    A = build_toeplitz(symbol, n)
    scaled = eigenvalues(A + scaled_companion(symbol, n, gamma))
    out.series["scaled-circulant"] = scaled
    lam = out.series["perturbed"]
    w_sc = _w1(lam, scaled)
    out.metrics["w1_perturbed_scaled_circulant"] = w_sc
    w_c = out.metrics["w1_perturbed_circulant"]["distance"]
    out.metrics["scaled_circulant_closer"] = bool(w_sc["distance"] <= w_c)
    log.info("W1(perturbed, circulant)=%.6g  W1(perturbed, scaled-circulant)=%.6g", w_c, w_sc["distance"])
    return out


def run_rate(cfg: dict, tol: Tolerances, jobs: int = 1) -> Outcome:
    symbol = symbol_from_config(cfg["symbol"])
    spec = perturbation_from_config(cfg["perturbation"])
    probes = [complex_from_config(z) for z in cfg.get("probes", [])]
    rng = SeededRng(cfg["seed"])
    tables = _pmap(_RateUnit(symbol, spec, rng, probes), cfg["n_list"], jobs)
    rows = [r for t in tables for r in t.rows]
    table = RateTable(rows)
    out = Outcome(metrics={"rate": table.as_dict(), "conjectured_slope": -1.0})
    out.tables["rate"] = [{"n": r.n, "w1": r.w1, "method": r.method, "noise_norm": r.noise_norm}
                          for r in rows]
    return out


@dataclass
class _RateUnit:
    symbol: ToeplitzSymbol
    spec: PerturbationSpec
    rng: SeededRng
    probes: list

    def __call__(self, n: int):
        return rate_experiment(self.symbol, self.spec, [n], self.rng, self.probes)


def _random_complex(gen: np.random.Generator, n: int) -> np.ndarray:
    return (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / math.sqrt(2 * n)


def norm_audit_instances(n: int, trials: int, eps: float, rng: SeededRng):
    """Yield ``(M1, M2, z)`` with ``||M1 - M2|| = eps/4``; even trials random, odd ones Toeplitz."""
    star = ToeplitzSymbol({-2: 2, 3: -1})
    for t in range(trials):
        gen = rng.trial(t).generator()
        if t % 2 == 0:
            M2 = _random_complex(gen, n)
        else:
            M2 = build_toeplitz(star, n)
            M2[n - 1, 0] += gen.uniform(0.0, 1e-3)
        D = _random_complex(gen, n)
        D *= (eps / 4) / spectral_norm(D)
        z = complex(gen.uniform(-1.5, 1.5), gen.uniform(-1.5, 1.5))
        yield M2 + D, M2, z


def rank_audit_instances(n: int, trials: int, rng: SeededRng):
    """Yield ``(M1, M2, z, planted_rank)`` with planted ranks cycling through 1..5."""
    for t in range(trials):
        gen = rng.trial(10_000 + t).generator()
        r = 1 + t % 5
        M2 = _random_complex(gen, n)
        U = gen.standard_normal((n, r)) + 1j * gen.standard_normal((n, r))
        V = gen.standard_normal((r, n)) + 1j * gen.standard_normal((r, n))
        z = complex(gen.uniform(-1.0, 1.0), gen.uniform(-1.0, 1.0))
        yield M2 + (U @ V) / n, M2, z, r


def run_bounds_audit(cfg: dict, tol: Tolerances, jobs: int = 1) -> Outcome:
    n, trials, eps = cfg["n"], cfg["trials"], cfg["eps"]
    rng = SeededRng(cfg["seed"])
    out = Outcome()
    norm_rows, rank_rows = [], []
    for M1, M2, z in norm_audit_instances(n, trials, eps, rng):
        rep = norm_comparison(M1, M2, z, eps, tol)
        out.violations += rep.violated
        norm_rows.append(rep)
    for M1, M2, z, r in rank_audit_instances(n, trials, rng):
        rep = rank_comparison(M1, M2, z, tol)
        out.violations += rep.violated
        rank_rows.append(rep)
    weyl_worst = -math.inf
    for t in range(trials):
        gen = rng.trial(20_000 + t).generator()
        M1, M2 = _random_complex(gen, n), _random_complex(gen, n)
        gap, dn = weyl_gap(M1, M2)
        excess = gap - dn
        weyl_worst = max(weyl_worst, excess)
        out.violations += excess > tol.weyl_atol
    shift = ToeplitzSymbol({-1: 1})
    chain = toeplitz_chain_report(shift, 64, PerturbationSpec(Kind.CORNER, gamma=3), 0.5, 0.25, rng, tol)
    grow_cfg = resolve("figure-growing", {"preset": "growing"})
    grow = toeplitz_chain_report(symbol_from_config(grow_cfg["symbol"]), 200,
                                 perturbation_from_config(grow_cfg["perturbation"]), 0.3 + 0.3j, 0.25, rng, tol)
    out.violations += chain.violated + grow.violated
    zoo_c = symbol_from_config(PRESETS["zoo-c"]["symbol"])
    norm_lsv = {
        "toeplitz_norm": [toeplitz_norm_audit(symbol_from_config(PRESETS[p]["symbol"]), n)
                          for p in ("zoo-a", "zoo-b", "zoo-c", "zoo-d", "star")],
        "ginibre_norm_tail": ginibre_norm_tail_audit((16, 32, 64), 0.75, 20, rng),
        "multiplicative_lsv": multiplicative_lsv_audit(zoo_c, 128, 3.0, 4.0, (0.5, 0.5j, 2 + 1j, 3.0),
                                                       cfg.get("trials", 50) // 2 or 1, rng),
    }
    out.violations += sum(r["violated"] for r in norm_lsv["toeplitz_norm"])

    def summarize(reps):
        asserted = [r for r in reps if r.hypotheses_ok]
        return {"instances": len(reps), "asserted": len(asserted),
                "violations": sum(r.violated for r in reps),
                "min_slack": min((r.slack for r in asserted), default=None),
                "min_slack_sharp": min((r.slack_sharp for r in asserted if r.slack_sharp is not None),
                                       default=None)}

    out.metrics = {
        "norm_comparison": summarize(norm_rows),
        "rank_comparison": summarize(rank_rows),
        "weyl": {"pairs": trials, "max_excess": weyl_worst},
        "chain_shift_corner": chain.as_dict(),
        "chain_growing_n200": grow.as_dict(),
        "norm_lsv": norm_lsv,
    }
    return out


def jordan_draw(gen: np.random.Generator, case: str) -> tuple[int, complex, complex, float]:
    """Random parameters landing in the requested corner-bound case.

    Corner entries stay below ``EPS_CAP`` so that ``||B - zI + E||`` is moderate
    and the measured least singular value is resolved by double precision.
    """
    m = int(gen.integers(2, 41))
    c = complex(gen.uniform(-2, 2), gen.uniform(-2, 2))
    theta = gen.uniform(0, 2 * math.pi)
    while True:
        if case == "supercritical":
            r = gen.uniform(1.01, 3.0)
            eps = min(0.5 * r**m, EPS_CAP) * gen.uniform(0.0, 1.0)
        else:
            r = gen.uniform(0.05, 0.99)
            rm = r**m
            if case == "subcritical-large-eps":
                eps = 2 * rm + gen.uniform(1e-12, 2.0) * (EPS_CAP - 2 * rm) / 2
            else:
                eps = 0.5 * rm * gen.uniform(0.0, 1.0)
        z = c + r * complex(math.cos(theta), math.sin(theta))
        found = jordan_corner_case(m, abs(z - c), eps)
        if found is not None and found.value == case:
            return m, c, z, eps


def run_jordan_audit(cfg: dict, tol: Tolerances, jobs: int = 1) -> Outcome:
    trials = cfg["trials"]
    rng = SeededRng(cfg["seed"])
    out = Outcome()
    gram_err = 0.0
    interlace_bad = 0
    for t in range(min(trials, 100)):
        gen = rng.trial(t).generator()
        m = int(gen.integers(2, 51))
        c, z = complex(*gen.uniform(-2, 2, 2)), complex(*gen.uniform(-2, 2, 2))
        ib = jordan_interlace_bounds(m, c, z)
        B = build_jordan(JordanSpec([(m, c)])) - z * np.eye(m)
        G = B[:-1] @ B[:-1].conj().T
        direct = np.sort(np.linalg.eigvalsh(G))[::-1]
        gram_err = max(gram_err, float(np.max(np.abs(direct - ib.gram_eigs))))
        s = np.linalg.svd(B, compute_uv=False)[: m - 1]
        interlace_bad += int(np.any(s < ib.lower - 1e-10) or np.any(s > ib.upper + 1e-10))
    out.violations += interlace_bad + (gram_err > 1e-10)
    cases = {}
    for k, case in enumerate(("subcritical-large-eps", "subcritical-small-eps", "supercritical")):
        worst, viol = math.inf, 0
        for t in range(trials):
            gen = rng.trial(100_000 * (k + 1) + t).generator()
            rep = jordan_corner_smin_bound(*jordan_draw(gen, case))
            viol += rep.violated
            if rep.bound > 0:
                worst = min(worst, rep.measured_sigma_min / rep.bound)
        cases[case] = {"draws": trials, "violations": viol, "min_ratio_measured_over_bound": worst}
        out.violations += viol
    worked = jordan_corner_smin_bound(4, 0.0, 0.0, 0.01)
    out.metrics = {"gram_max_abs_error": gram_err, "interlace_violations": interlace_bad,
                   "corner_cases": cases, "worked_example": worked.as_dict()}
    return out


@dataclass
class _SignUnit:
    n: int
    gamma: float
    rng: SeededRng

    def __call__(self, t: int) -> dict:
        signs = sign_pattern(self.n, self.rng.trial(t))
        reps = [sign_perturbation_smin_audit(self.n, self.gamma, z, signs=signs) for z in SIGN_Z_GRID]
        lam = eigenvalues(build_shift(self.n) + signs * float(self.n) ** (-self.gamma))
        return {"min_measured": min(r.measured for r in reps),
                "violations": sum(r.violated for r in reps),
                "asserted": sum(r.preconditions_ok for r in reps),
                "eigs_in_disk": int(np.count_nonzero(np.abs(lam) <= 0.2))}


def run_sign_audit(cfg: dict, tol: Tolerances, jobs: int = 1) -> Outcome:
    n, gamma = cfg["n"], cfg["perturbation"].get("gamma", 5)
    rows = _pmap(_SignUnit(n, gamma, SeededRng(cfg["seed"])), range(cfg["trials"]), jobs)
    viol = sum(r["violations"] for r in rows)
    out = Outcome(violations=viol)
    out.metrics = {
        "n": n, "gamma": gamma, "trials": len(rows), "z_grid": [[z.real, z.imag] for z in map(complex, SIGN_Z_GRID)],
        "bound": 0.15 * float(n) ** (-gamma),
        "min_measured": min(r["min_measured"] for r in rows),
        "violations": viol, "asserted_instances": sum(r["asserted"] for r in rows),
        "zn_small": all(zn_small_check(z, n, gamma) for z in SIGN_Z_GRID),
        "max_eigs_in_disk_0.2": max(r["eigs_in_disk"] for r in rows),
        "scarcity_budget_10_log_n": 10 * math.log(n),
    }
    return out


def mc_pair(n: int, spec: PerturbationSpec, rng: SeededRng) -> tuple[np.ndarray, np.ndarray]:
    """``M1`` a normalized complex Ginibre matrix and ``M2 = M1 + n^(-alpha-gamma) E``."""
    M1 = _random_complex(rng.generator(), n)
    M2 = apply_additive(M1, spec, SeededRng(rng.seed, rng.stream ^ 0x5EED)).matrix
    return M1, M2


@dataclass
class _MCUnit:
    n: int
    m: int
    eps: float
    spec: PerturbationSpec
    phi: BumpTestFunction
    rng: SeededRng

    def __call__(self, t: int) -> dict:
        r = self.rng.trial(t)
        M1, M2 = mc_pair(self.n, self.spec, r)
        exact = integrate_esm(self.phi, esm(M1)) - integrate_esm(self.phi, esm(M2))
        est = mc_replacement(M1, M2, self.phi, self.m, SeededRng(r.seed, r.stream ^ 0xC0FFEE)).estimate
        T = max(spectral_norm(M1) + spectral_norm(M2), 2.0 + 1e-9)
        bound = mc_error_bound(self.phi, self.m, self.eps, T, replacement_constants(self.phi))
        return {"trial": t, "estimate": est, "exact": exact, "error": abs(est - exact), "bound": bound,
                "exceeds": abs(est - exact) > bound}


def run_mc_replace(cfg: dict, tol: Tolerances, jobs: int = 1) -> Outcome:
    ph = cfg["phi"]
    phi = BumpTestFunction(complex_from_config(ph.get("center", 0)), ph.get("radius", 1.0),
                           ph.get("amplitude", 1.0))
    unit = _MCUnit(cfg["n"], cfg["m"], cfg["eps"], perturbation_from_config(cfg["perturbation"]), phi,
                   SeededRng(cfg["seed"]))
    rows = _pmap(unit, range(cfg["trials"]), jobs)
    const = replacement_constants(phi)
    out = Outcome()
    out.tables["mc"] = rows
    out.metrics = {"trials": len(rows), "m": cfg["m"], "eps_budget": cfg["eps"],
                   "exceedances": sum(r["exceeds"] for r in rows),
                   "c_main": const.c_main, "c_area": const.c_area, "lap_sup": const.lap_sup,
                   "lap_grid_resolution": const.lap_grid_resolution,
                   "max_error": max(r["error"] for r in rows)}
    return out


RUNNERS = {
    "spectrum": run_spectrum,
    "figure-zoo": run_figure_zoo,
    "figure-growing": run_figure_growing,
    "figure-star": run_figure_star,
    "rate": run_rate,
    "bounds-audit": run_bounds_audit,
    "jordan-audit": run_jordan_audit,
    "sign-audit": run_sign_audit,
    "mc-replace": run_mc_replace,
}


def run(cfg: dict, tol: Tolerances, jobs: int = 1) -> Outcome:
    return RUNNERS[cfg["experiment"]](cfg, tol, jobs)
