import math

import numpy as np
import pytest

from nonnormal.bounds import (
    JordanCase,
    geometric_residual,
    geometric_singular_vector,
    ginibre_norm_tail_audit,
    jordan_corner_case,
    jordan_corner_smin_bound,
    jordan_interlace_bounds,
    multiplicative_lsv_audit,
    norm_comparison,
    norm_lsv_audits,
    rank_comparison,
    sign_perturbation_smin_audit,
    toeplitz_chain_report,
    toeplitz_norm_audit,
    weyl_gap,
    zn_small_check,
)
from nonnormal.builders import ToeplitzSymbol, build_jordan, build_shift, JordanSpec
from nonnormal.config import PRESETS, symbol_from_config
from nonnormal.perturbations import Kind, PerturbationSpec, SeededRng
from oracles import gram_singular_values, random_complex

SHIFT = ToeplitzSymbol({-1: 1})


def test_norm_comparison_worked_example():
    rep = norm_comparison(np.diag([2.1, 1.9]), 2 * np.eye(2), 0, 0.4)
    assert rep.hypotheses_ok
    assert rep.inputs["nu"] == 0
    assert rep.rhs == pytest.approx(0.5, abs=1e-12)
    assert rep.lhs == pytest.approx(0.5 * abs(math.log(3.99 / 4)), rel=1e-12)
    assert rep.lhs == pytest.approx(0.00125, abs=1e-5)
    assert not rep.violated


def test_norm_comparison_identical_and_hypotheses(gen):
    M = random_complex(gen, 5)
    rep = norm_comparison(M, M, 0.1, 0.2)
    assert rep.lhs == 0.0 and rep.slack >= 0
    bad = norm_comparison(M, M + 0.5 * np.eye(5), 0.1, 0.2)
    assert not bad.hypotheses["perturbation_small"]
    assert not bad.violated
    assert not norm_comparison(M, M, 0.1, 0.7).hypotheses["eps_in_range"]


def test_norm_comparison_random_quarter_eps(gen):
    n, eps = 32, 0.2
    for _ in range(100):
        M2 = random_complex(gen, n, 1 / math.sqrt(n))
        D = random_complex(gen, n)
        D *= (eps / 4) / np.linalg.norm(D, 2)
        rep = norm_comparison(M2 + D, M2, 0.3 + 0.2j, eps)
        assert rep.hypotheses_ok and rep.slack >= 0
        assert rep.rhs_sharp <= rep.rhs


def test_rank_comparison_examples():
    rep = rank_comparison(np.diag([2.0, 1, 1, 1]), np.eye(4), 0)
    assert rep.inputs["rank"] == 1
    assert rep.rhs == pytest.approx(math.log(2) / 2, abs=1e-12)
    assert rep.lhs == pytest.approx(math.log(2) / 4, abs=1e-12)
    same = rank_comparison(np.eye(3), np.eye(3), 0.5)
    assert same.rhs == 0 and same.lhs == 0 and same.inputs["rank"] == 0


def test_rank_comparison_singular_is_unasserted():
    rep = rank_comparison(build_shift(4), np.eye(4), 0)
    assert not rep.hypotheses_ok and not rep.violated


def test_weyl_gap_examples(gen):
    M = random_complex(gen, 8)
    assert weyl_gap(M, M) == (0.0, 0.0)
    gap, norm = weyl_gap(M, M + 0.3 * np.eye(8))
    assert gap <= 0.3 + 1e-12 and norm == pytest.approx(0.3)
    for _ in range(100):
        A, B = random_complex(gen, 32), random_complex(gen, 32)
        gap, norm = weyl_gap(A, B)
        ref = np.max(np.abs(gram_singular_values(A) - gram_singular_values(B)))
        assert gap == pytest.approx(ref, abs=1e-9)
        assert gap <= norm + 1e-10


def test_chain_zero_noise_reduces_to_rank_link():
    rep = toeplitz_chain_report(SHIFT, 16, PerturbationSpec(Kind.ZERO), 0.5, 0.25, SeededRng(0))
    assert rep.norm_link.lhs == 0.0
    assert rep.end_to_end == pytest.approx(rep.rank_link.lhs, abs=1e-14)
    assert rep.noise_norm == 0.0


def test_chain_shift_corner():
    rep = toeplitz_chain_report(SHIFT, 64, PerturbationSpec(Kind.CORNER, gamma=1.0, epsilon=1.0),
                                0.5, 0.25, SeededRng(0))
    assert rep.hypotheses_ok
    assert rep.end_to_end <= rep.summed_bound
    assert not rep.violated
    assert rep.as_dict()["summed_bound"] == rep.summed_bound


def test_companion_rank_link_on_presets():
    for name in ("zoo-a", "zoo-b", "star"):
        sym = symbol_from_config(PRESETS[name]["symbol"])
        rep = toeplitz_chain_report(sym, 64, PerturbationSpec(Kind.ZERO), 2.5 + 2.5j, 0.25, SeededRng(1))
        k = max(abs(j) for j in sym.truncated(64))
        assert rep.rank_link.inputs["rank"] <= 2 * k


def test_interlace_examples():
    b = jordan_interlace_bounds(3, 1.0, 0.0)
    np.testing.assert_allclose(b.gram_eigs, [3, 1], atol=1e-14)
    rows = (build_jordan(JordanSpec([(3, 1.0)])) - 0 * np.eye(3))[:2]
    np.testing.assert_allclose(np.linalg.svd(rows, compute_uv=False), [math.sqrt(3), 1], atol=1e-12)
    b0 = jordan_interlace_bounds(6, 0.3, 0.3)
    np.testing.assert_allclose(b0.gram_eigs, 1.0, atol=1e-14)
    assert (b0.lower, b0.upper) == (1.0, 1.0)
    with pytest.raises(ValueError):
        jordan_interlace_bounds(1, 0, 0)


@pytest.mark.parametrize("m", [2, 5, 17, 50])
def test_interlace_gram_matches_tridiagonal(gen, m):
    c, z = complex(*gen.standard_normal(2)), complex(*gen.standard_normal(2))
    d = abs(c - z)
    tri = np.diag(np.full(m - 1, d * d + 1)) + np.diag(np.full(m - 2, d), 1) + np.diag(np.full(m - 2, d), -1)
    np.testing.assert_allclose(jordan_interlace_bounds(m, c, z).gram_eigs,
                               np.sort(np.linalg.eigvalsh(tri))[::-1], atol=1e-10)


def test_interlace_brackets_top_singular_values(gen):
    for _ in range(20):
        c, z = complex(*gen.standard_normal(2)), complex(*gen.standard_normal(2))
        b = jordan_interlace_bounds(5, c, z)
        s = np.linalg.svd(build_jordan(JordanSpec([(5, c)])) - z * np.eye(5), compute_uv=False)
        assert np.all(s[:4] >= b.lower - 1e-10) and np.all(s[:4] <= b.upper + 1e-10)


def test_corner_worked_example():
    rep = jordan_corner_smin_bound(4, 0.3, 0.3, 0.01)
    assert rep.case is JordanCase.SUBCRITICAL_LARGE_EPS
    assert rep.bound == pytest.approx(0.01 / math.sqrt(8.0008), rel=1e-12)
    assert rep.bound == pytest.approx(0.003536, abs=1e-6)
    assert rep.measured_sigma_min == pytest.approx(0.01, rel=1e-12)
    assert not rep.violated


def test_corner_case_selection():
    assert jordan_corner_case(4, 0.0, 0.01) is JordanCase.SUBCRITICAL_LARGE_EPS
    assert jordan_corner_case(4, 0.5, 1e-4) is JordanCase.SUBCRITICAL_SMALL_EPS
    assert jordan_corner_case(4, 2.0, 1.0) is JordanCase.SUPERCRITICAL
    assert jordan_corner_case(4, 0.5, 0.1) is None  # between the two subcritical regimes
    assert jordan_corner_case(4, 1.0, 0.1) is None
    # r^m underflows in floating point but the log-domain comparison still works
    assert jordan_corner_case(2000, 0.5, 1e-300) is JordanCase.SUBCRITICAL_LARGE_EPS


def test_corner_case_two_independent_of_eps():
    a = jordan_corner_smin_bound(6, 0, 0.6, 1e-8)
    b = jordan_corner_smin_bound(6, 0, 0.6, 1e-12)
    assert a.bound == b.bound


def test_corner_z_equals_c_gives_eps():
    for eps in (1e-3, 0.05, 0.2):
        assert jordan_corner_smin_bound(7, 1 + 1j, 1 + 1j, eps).measured_sigma_min == pytest.approx(eps, rel=1e-10)


def test_sign_audit_examples():
    rep = sign_perturbation_smin_audit(25, 5, 0.0, signs=np.ones((25, 25)))
    assert rep.preconditions_ok and not rep.violated
    assert rep.bound == pytest.approx(0.15 * 25.0**-5)
    assert rep.bound == pytest.approx(1.536e-8, rel=1e-3)
    for t in range(20):
        assert not sign_perturbation_smin_audit(25, 5, 0.2, SeededRng(7, t)).violated
    diag = sign_perturbation_smin_audit(10, 5, 0.0, SeededRng(0))
    assert not diag.preconditions_ok
    with pytest.raises(ValueError):
        sign_perturbation_smin_audit(4, 5, 0)
    with pytest.raises(ValueError):
        sign_perturbation_smin_audit(2, 5, 0, signs=[[1, 0], [1, 1]])


@pytest.mark.parametrize("z", [0.2, 0.5 + 0.5j, -0.9, 1.0, 1.3j])
def test_geometric_residual(z):
    n = 12
    v = geometric_singular_vector(z, n)
    assert np.linalg.norm(v) == pytest.approx(1.0)
    r = np.linalg.norm((build_shift(n) - z * np.eye(n)) @ v)
    assert r == pytest.approx(geometric_residual(z, n), rel=1e-10)


def test_zn_small_check():
    assert zn_small_check(0.25, 25, 5)
    assert 24 * math.log(0.25) < -5 * math.log(25)
    assert zn_small_check(0, 25, 5)
    assert not zn_small_check(0.9, 25, 5)


def test_toeplitz_norm_audit():
    rep = toeplitz_norm_audit(ToeplitzSymbol({0: 5}), 10)
    assert rep["norm"] == pytest.approx(5) and rep["bound"] == 5 and not rep["violated"]
    rep = toeplitz_norm_audit(SHIFT, 10)
    assert rep["norm"] == pytest.approx(1) and not rep["violated"]


def test_ginibre_tail_decreases():
    rep = ginibre_norm_tail_audit([16, 64], 0.6, 30, SeededRng(0))
    assert [r["n"] for r in rep["rows"]] == [16, 64]
    assert all(0 <= r["frequency"] <= 1 for r in rep["rows"])


def test_multiplicative_lsv_zoo_c():
    sym = symbol_from_config(PRESETS["zoo-c"]["symbol"])
    rep = multiplicative_lsv_audit(sym, 128, 3.0, 4.0, (0.5, 0.5j, 2 + 1j, 3.0), 50, SeededRng(0))
    assert rep["failures"] == 0
    with pytest.raises(ValueError):
        multiplicative_lsv_audit(sym, 16, 3.0, 4.0, (0,), 1, SeededRng(0))


def test_norm_lsv_audits_bundle():
    rep = norm_lsv_audits(SHIFT, 32, SeededRng(0), seeds=3, tail_trials=5)
    assert set(rep) == {"toeplitz_norm", "ginibre_norm_tail", "multiplicative_lsv"}
    assert not rep["toeplitz_norm"]["violated"]
    assert rep["multiplicative_lsv"]["probes"] == 4
