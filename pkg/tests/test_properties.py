"""Property-based checks of the structural invariants."""

import math

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from nonnormal.bounds import (
    jordan_corner_case,
    jordan_corner_smin_bound,
    norm_comparison,
    rank_comparison,
    weyl_gap,
)
from nonnormal.builders import (
    ToeplitzSymbol,
    build_circulant,
    build_toeplitz,
    circulant_eigenvalues,
    companion,
    symbol_samples,
)
from nonnormal.linalg import canonical_order, eigenvalues, numerical_rank, singular_values, spectral_norm
from nonnormal.perturbations import SeededRng
from nonnormal.potential import BumpTestFunction, log_potential, mc_replacement
from nonnormal.transport import w1_exact, w1_square_pairing
from oracles import brute_force_w1, multiset_distance

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)


def matrices(n_min=1, n_max=8):
    return st.integers(n_min, n_max).flatmap(
        lambda n: st.lists(cplx, min_size=n * n, max_size=n * n).map(lambda v: np.array(v).reshape(n, n)))


def pair_of_matrices(n_min=2, n_max=7):
    return st.integers(n_min, n_max).flatmap(
        lambda n: st.tuples(*[st.lists(cplx, min_size=n * n, max_size=n * n)
                              .map(lambda v, n=n: np.array(v).reshape(n, n))] * 2))


@st.composite
def symbols(draw, max_k=4):
    keys = draw(st.lists(st.integers(-max_k, max_k), min_size=1, max_size=4, unique=True))
    return ToeplitzSymbol({k: draw(cplx) for k in keys})


@st.composite
def clouds(draw, n_min=1, n_max=6):
    n = draw(st.integers(n_min, n_max))
    xs = draw(st.lists(cplx, min_size=n, max_size=n))
    ys = draw(st.lists(cplx, min_size=n, max_size=n))
    return np.array(xs), np.array(ys)


@SETTINGS
@given(matrices())
def test_eigenvalue_count_and_trace(M):
    lam = eigenvalues(M)
    assert lam.size == M.shape[0]
    assert abs(lam.sum() - np.trace(M)) <= 1e-8 * (1 + np.abs(M).sum())


@SETTINGS
@given(matrices())
def test_singular_values_sorted_nonnegative(M):
    s = singular_values(M)
    assert np.all(s >= 0) and np.all(np.diff(s) <= 0)
    assert abs(s[0] - spectral_norm(M)) <= 1e-12 * max(1, s[0])


@SETTINGS
@given(st.lists(cplx, min_size=1, max_size=20))
def test_canonical_order_is_permutation(v):
    out = canonical_order(v)
    key = lambda a: sorted((z.real, z.imag) for z in np.asarray(a, dtype=complex))
    assert key(out) == key(v)
    assert np.all(np.diff(np.abs(out)) <= 1e-15)


@SETTINGS
@given(st.integers(1, 40).flatmap(lambda n: st.lists(cplx, min_size=n, max_size=n)))
def test_circulant_spectrum_formula(c):
    c = np.array(c)
    scale = 1 + np.abs(c).sum()
    assert multiset_distance(circulant_eigenvalues(c), eigenvalues(build_circulant(c))) <= 1e-9 * scale


@SETTINGS
@given(symbols(), st.integers(10, 40))
def test_companion_completes_circulant(sym, n):
    k = sym.support_width
    assume(k < n / 2)
    A, Ap = build_toeplitz(sym, n), companion(sym, n)
    scale = 1 + sum(abs(a) for a in sym.coeffs.values())
    assert multiset_distance(eigenvalues(A + Ap), symbol_samples(sym, n)) <= 1e-8 * scale
    assert numerical_rank(Ap) <= 2 * k
    assert np.sum(np.abs(Ap) ** 2) <= n * sym.l2_squared(n) + 1e-9
    if np.any(A):
        assert spectral_norm(A) <= sym.l1(n) + 1e-9 * scale


@SETTINGS
@given(pair_of_matrices())
def test_weyl(pair):
    gap, norm = weyl_gap(*pair)
    assert gap <= norm + 1e-10 * (1 + norm)


@SETTINGS
@given(pair_of_matrices(), cplx)
def test_rank_comparison_never_violated(pair, z):
    rep = rank_comparison(pair[0], pair[1], z)
    assume(rep.hypotheses_ok)
    assert not rep.violated


@SETTINGS
@given(matrices(2, 8), st.floats(0.01, 0.49), st.floats(0.0, 0.99), st.integers(0, 2**32 - 1), cplx)
def test_norm_comparison_never_violated(M2, eps, frac, seed, z):
    gen = np.random.default_rng(seed)
    n = M2.shape[0]
    D = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
    D *= frac * (eps / 2) / np.linalg.norm(D, 2)
    rep = norm_comparison(M2 + D, M2, z, eps)
    assume(rep.hypotheses_ok)
    assert not rep.violated
    assert rep.rhs_sharp <= rep.rhs


@SETTINGS
@given(st.integers(1, 40), cplx, st.floats(0.0, 2.0), st.floats(0, 2 * math.pi), st.floats(1e-12, 4.0))
def test_jordan_corner_bound(m, c, r, theta, eps):
    z = c + r * complex(math.cos(theta), math.sin(theta))
    rep = jordan_corner_smin_bound(m, c, z, eps)
    assume(rep.case is not None)
    assert rep.measured_sigma_min >= rep.bound - 1e-12
    assert rep.case == jordan_corner_case(m, abs(z - c), eps)


@SETTINGS
@given(clouds())
def test_w1_metric_and_brute_force(xy):
    x, y = xy
    d = w1_exact(x, y).distance
    assert abs(d - brute_force_w1(x, y)) <= 1e-12 * (1 + d)
    assert abs(d - w1_exact(y, x).distance) <= 1e-12 * (1 + d)
    assert w1_exact(x, x).distance == 0.0


@SETTINGS
@given(clouds(3, 6), st.integers(0, 2**32 - 1))
def test_w1_triangle(xy, seed):
    x, y = xy
    w = np.random.default_rng(seed).standard_normal(x.size) * (1 + 0j)
    assert w1_exact(x, w).distance <= w1_exact(x, y).distance + w1_exact(y, w).distance + 1e-10


@SETTINGS
@given(clouds(1, 30), st.floats(0.05, 10.0))
def test_square_pairing_upper_bound(xy, side):
    x, y = xy
    assert w1_square_pairing(x, y, side).distance >= w1_exact(x, y).distance - 1e-12


@SETTINGS
@given(matrices(1, 6), cplx)
def test_log_potential_eigen_form(M, z):
    lam = eigenvalues(M)
    assume(np.min(np.abs(lam - z)) > 1e-3)
    assert abs(log_potential(M, z) - np.mean(np.log(np.abs(lam - z)))) <= 1e-8 * (1 + np.abs(M).max())


@SETTINGS
@given(matrices(1, 5), st.integers(0, 2**32 - 1))
def test_mc_identical_zero(M, seed):
    assert mc_replacement(M, M, BumpTestFunction(0, 1.5), 20, SeededRng(seed)).estimate == 0.0
