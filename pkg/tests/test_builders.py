import numpy as np
import pytest

from nonnormal.builders import (
    FixedBandwidth,
    JordanSpec,
    PowerBandwidth,
    ToeplitzSymbol,
    build_circulant,
    build_jordan,
    build_shift,
    build_toeplitz,
    circulant_eigenvalues,
    companion,
    roots_of_unity,
    scaled_companion,
    symbol_eval,
    symbol_samples,
)
from nonnormal.linalg import eigenvalues, numerical_rank, spectral_norm
from oracles import multiset_distance

STAR = ToeplitzSymbol({-2: 2, 3: -1})


def test_shift_symbol_gives_superdiagonal():
    A = build_toeplitz(ToeplitzSymbol({-1: 1}), 4)
    np.testing.assert_array_equal(A, np.diag(np.ones(3), 1))
    np.testing.assert_array_equal(build_shift(2), [[0, 1], [0, 0]])
    np.testing.assert_array_equal(build_shift(1), [[0]])
    assert not np.any(np.linalg.matrix_power(build_shift(5), 5))


def test_star_symbol_layout():
    A = build_toeplitz(STAR, 6)
    expected = 2 * np.diag(np.ones(4), 2) - np.diag(np.ones(3), -3)
    np.testing.assert_array_equal(A, expected)


def test_constant_symbol_is_scaled_identity():
    np.testing.assert_array_equal(build_toeplitz(ToeplitzSymbol({0: 5}), 7), 5 * np.eye(7))


def test_bandwidth_rules():
    assert PowerBandwidth(1 / 3, 1)(1000) == 9
    assert PowerBandwidth(1 / 3, 1)(27) == 2
    assert FixedBandwidth(3)(100) == 3
    sym = ToeplitzSymbol({-3: 1, 0: 1, 3: 1}, FixedBandwidth(2))
    assert sym.truncated(10) == {0: 1}


def test_circulant_layout():
    np.testing.assert_array_equal(build_circulant([1, 0, 0, 0]), np.eye(4))
    P = build_circulant([0, 1, 0, 0])
    np.testing.assert_array_equal(P, np.roll(np.eye(4), 1, axis=0))
    c0, c1, c2 = 1 + 2j, 3.0, -1j
    np.testing.assert_array_equal(build_circulant([c0, c1, c2]),
                                  [[c0, c2, c1], [c1, c0, c2], [c2, c1, c0]])


def test_circulant_eigenvalues_examples():
    np.testing.assert_allclose(circulant_eigenvalues([1, 0, 0, 0, 0]), np.ones(5))
    lam = circulant_eigenvalues([0, 1, 0, 0])
    assert multiset_distance(lam, [1, -1j, -1, 1j]) < 1e-14


@pytest.mark.parametrize("n", [16, 600])
def test_circulant_eigenvalues_match_dense_solver(gen, n):
    c = gen.standard_normal(n) + 1j * gen.standard_normal(n)
    assert multiset_distance(circulant_eigenvalues(c), eigenvalues(build_circulant(c))) < 1e-9


def test_circulant_fast_and_dense_paths_agree(gen):
    c = gen.standard_normal(40) + 1j * gen.standard_normal(40)
    k = np.arange(40)
    dense = np.array([np.sum(c[(-k) % 40] * np.exp(2j * np.pi * j * k / 40)) for j in range(40)])
    np.testing.assert_allclose(circulant_eigenvalues(c), dense, atol=1e-11)
    np.testing.assert_allclose(np.fft.fft(c), dense, atol=1e-11)


def test_companion_of_shift_is_corner():
    Ap = companion(ToeplitzSymbol({-1: 1}), 4)
    expected = np.zeros((4, 4))
    expected[3, 0] = 1
    np.testing.assert_array_equal(Ap, expected)
    assert numerical_rank(Ap) == 1


def test_companion_of_constant_is_zero():
    assert not np.any(companion(ToeplitzSymbol({0: 5}), 6))


def test_star_companion_rank_and_frobenius():
    Ap = companion(STAR, 8)
    assert numerical_rank(Ap) <= 6
    assert np.sum(np.abs(Ap) ** 2) <= 8 * 5 + 1e-12


def test_companion_requires_narrow_band():
    with pytest.raises(ValueError):
        companion(ToeplitzSymbol({-3: 1}), 6)


def test_scaled_companion():
    sym = ToeplitzSymbol({-1: 1})
    np.testing.assert_array_equal(scaled_companion(sym, 4, 0), companion(sym, 4))
    assert scaled_companion(sym, 4, 2)[3, 0] == pytest.approx(0.0625)


def test_jordan_blocks():
    np.testing.assert_array_equal(build_jordan(JordanSpec([(3, 0)])), build_shift(3))
    np.testing.assert_array_equal(build_jordan(JordanSpec([(2, 7)])), [[7, 1], [0, 7]])
    M = build_jordan(JordanSpec([(2, 0), (2, 0)], [1.0, 1.0]))
    lam = eigenvalues(M)
    assert multiset_distance(lam, [1, 1, -1, -1]) < 1e-12


def test_jordan_spec_validation():
    with pytest.raises(ValueError):
        JordanSpec([])
    with pytest.raises(ValueError):
        JordanSpec([(0, 1)])
    with pytest.raises(ValueError):
        JordanSpec([(2, 1)], [-1.0])
    with pytest.raises(ValueError):
        JordanSpec([(2, 1)], [1.0, 2.0])


def test_symbol_eval_and_samples():
    shift = ToeplitzSymbol({-1: 1})
    w = np.exp(0.3j)
    assert symbol_eval(shift, w) == pytest.approx(np.conj(w))
    np.testing.assert_allclose(symbol_samples(shift, 4), [1, -1j, -1, 1j], atol=1e-15)
    ellipse = ToeplitzSymbol({-1: 4, 1: 1})
    assert symbol_eval(ellipse, w) == pytest.approx(4 / w + w)
    with pytest.raises(ValueError):
        symbol_eval(shift, 1.1)


@pytest.mark.parametrize("sym", [STAR, ToeplitzSymbol({-1: 4, 1: 1}), ToeplitzSymbol({-1: 2, 6: 1})])
def test_samples_equal_completed_circulant_spectrum(sym):
    n = 16
    lam = eigenvalues(build_toeplitz(sym, n) + companion(sym, n))
    assert multiset_distance(lam, symbol_samples(sym, n)) < 1e-9


def test_toeplitz_norm_below_l1():
    for sym in (STAR, ToeplitzSymbol({-1: 4, 1: 1}), ToeplitzSymbol({0: 5})):
        assert spectral_norm(build_toeplitz(sym, 20)) <= sym.l1(20) + 1e-10


def test_roots_of_unity():
    np.testing.assert_allclose(roots_of_unity(4), [1, 1j, -1, -1j], atol=1e-15)


def test_symbol_diagnostics():
    assert STAR.l2_squared(10) == 5
    assert STAR.first_moment(10) == 7
    assert STAR.support_width == 3
