import math

import numpy as np
import pytest

import zetamoments as zm
from conftest import brute_dk
from zetamoments.arith import CapacityError, PrecisionError


# ---------------------------------------------------------------------------
# d_k sieves
# ---------------------------------------------------------------------------

def test_d1_is_ones():
    assert list(zm.sieve_dk(1, 5).values) == [1, 1, 1, 1, 1]


def test_d2_of_6_counts_divisors():
    assert zm.sieve_dk(2, 6).value(6) == 4  # 1, 2, 3, 6


def test_d3_of_4_counts_ordered_triples():
    # (1,1,4), (1,2,2) in all arrangements: 3 + 3
    assert zm.sieve_dk(3, 4).value(4) == 6


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_dk_matches_bruteforce(k):
    table = zm.sieve_dk(k, 60)
    for n in range(1, 61):
        assert table.value(n) == brute_dk(k, n), (k, n)


def test_dk_prime_values():
    for k in (2, 3, 6):
        t = zm.sieve_dk(k, 100)
        for p in (2, 3, 53, 97):
            assert t.value(p) == k


def test_dk_multiplicative(rng):
    t = zm.sieve_dk(3, 10**5)
    pairs = 0
    while pairs < 2000:
        m = int(rng.integers(2, 1000))
        n = int(rng.integers(2, 10**5 // m))
        if math.gcd(m, n) == 1:
            assert t.value(m * n) == t.value(m) * t.value(n)
            pairs += 1


def test_dk_prefix_sums_nondecreasing(d2_1e6):
    pref = d2_1e6.prefix_sums()
    assert np.all(np.diff(pref) > 0)
    # jump at n equals d(n)
    assert pref[99] - pref[98] == d2_1e6.value(100)


def test_sieve_rejects_bad_args():
    with pytest.raises(ValueError):
        zm.sieve_dk(0, 10)
    with pytest.raises(CapacityError):
        zm.sieve_dk(2, 10**9)


# ---------------------------------------------------------------------------
# Dirichlet convolution
# ---------------------------------------------------------------------------

def test_ones_convolved_is_d2():
    ones = zm.ones_table(200)
    conv = zm.dirichlet_convolve(ones, ones)
    assert np.array_equal(conv.values, zm.sieve_dk(2, 200).values)


def test_convolution_identity():
    a = zm.sieve_dk(3, 50)
    delta = zm.CoeffTable("delta1", 50, np.array([1] + [0] * 49, dtype=np.int64))
    assert np.array_equal(zm.dirichlet_convolve(a, delta).values, a.values)


def test_d2_convolved_with_ones_is_d3():
    N = 300
    ones = zm.ones_table(N)
    conv = zm.dirichlet_convolve(zm.sieve_dk(2, N), ones)
    assert np.array_equal(conv.values, zm.sieve_dk(3, N).values)


def test_convolution_associative(rng):
    N = 64
    mk = lambda: zm.CoeffTable("r", N, rng.integers(-9, 10, N).astype(np.int64))
    a, b, c = mk(), mk(), mk()
    left = zm.dirichlet_convolve(zm.dirichlet_convolve(a, b), c)
    right = zm.dirichlet_convolve(a, zm.dirichlet_convolve(b, c))
    assert np.array_equal(left.values, right.values)


def test_convolution_length_mismatch():
    with pytest.raises(ValueError):
        zm.dirichlet_convolve(zm.ones_table(10), zm.ones_table(11))


def test_convolution_promotes_to_float():
    a = zm.ones_table(20)
    b = zm.CoeffTable("f", 20, np.ones(20) * 0.5)
    out = zm.dirichlet_convolve(a, b)
    assert out.values.dtype.kind == "f"


# ---------------------------------------------------------------------------
# Stieltjes constants and P_{k-1}
# ---------------------------------------------------------------------------

def test_stieltjes_known_digits(gammas):
    assert gammas[0] == pytest.approx(0.577215664902, abs=5e-13)
    assert gammas[1] == pytest.approx(-0.072815845484, abs=5e-13)
    assert gammas[2] == pytest.approx(-0.009690363193, abs=5e-13)


def test_stieltjes_vs_zeta_limit(gammas):
    # zeta(1+eps) - 1/eps -> gamma_0 (eps as actually represented in double)
    s = 1.0 + 1e-6
    eps = s - 1.0
    z = zm.zeta_em(complex(s, 0), 1e-10).value.real
    assert abs((z - 1 / eps) - gammas[0]) < 1e-6


def test_stieltjes_rejects_large_j():
    with pytest.raises(PrecisionError):
        zm.stieltjes_constants(21)


def test_main_poly_k1():
    p = zm.main_poly(1)
    assert p.coeffs == pytest.approx([1.0])


def test_main_poly_k2_classical(gammas):
    p = zm.main_poly(2)
    assert p.coeffs[1] == pytest.approx(1.0, abs=1e-12)
    assert p.coeffs[0] == pytest.approx(2 * gammas[0] - 1, abs=1e-12)
    assert p.coeffs[0] == pytest.approx(0.154431330, abs=5e-10)


def test_main_poly_k3_classical(gammas):
    # residue of zeta^3 x^s/s at 1: leading 1/2, then 3g-1, then 3g^2-3g_1-3g+1
    g0, g1 = gammas[0], gammas[1]
    p = zm.main_poly(3)
    assert p.coeffs[2] == pytest.approx(0.5, abs=1e-12)
    assert p.coeffs[1] == pytest.approx(3 * g0 - 1, abs=1e-11)
    assert p.coeffs[0] == pytest.approx(3 * g0**2 - 3 * g1 - 3 * g0 + 1, abs=1e-11)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6])
def test_main_poly_leading_coefficient(k):
    p = zm.main_poly(k)
    assert p.coeffs[-1] == pytest.approx(1 / math.factorial(k - 1), rel=1e-10)
    assert len(p.coeffs) == k


def test_main_poly_q_coefficients(gammas):
    # Q = P + P': for k=2, P = u + (2g-1) so Q = u + 2g
    q = zm.main_poly(2).q_coeffs()
    assert q[1] == pytest.approx(1.0, abs=1e-12)
    assert q[0] == pytest.approx(2 * gammas[0], abs=1e-11)


# ---------------------------------------------------------------------------
# Delta_k and mean squares
# ---------------------------------------------------------------------------

def test_delta_1_is_sawtooth():
    ones = zm.ones_table(10)
    p = zm.main_poly(1)
    assert zm.delta_k(1, 2.5, ones, p) == pytest.approx(-0.5)


def test_delta_2_at_100(d2_1e6):
    # D_2(100) by brute-force divisor counting
    D100 = sum(sum(1 for d in range(1, n + 1) if n % d == 0) for n in range(1, 101))
    assert D100 == 482
    p = zm.main_poly(2)
    main = 100 * p(math.log(100))
    assert main == pytest.approx(475.960, abs=5e-3)
    assert zm.delta_k(2, 100.0, d2_1e6, p) == pytest.approx(D100 - main, abs=1e-9)


def test_delta_3_at_1():
    t = zm.sieve_dk(3, 10)
    p = zm.main_poly(3)
    assert zm.delta_k(3, 1.0, t, p) == pytest.approx(1 - p.coeffs[0], abs=1e-12)


def test_delta_out_of_range(d2_1e6):
    with pytest.raises(ValueError):
        zm.delta_k(2, 2 * 10**6, d2_1e6, zm.main_poly(2))


def test_mean_square_k1_exact():
    ones = zm.ones_table(500)
    curve = zm.delta_mean_square(1, [10, 100, 500], ones, zm.main_poly(1))
    for X, v in curve.cumulative_ms:
        assert v == pytest.approx((X - 1) / 3, rel=1e-10)


def test_mean_square_matches_dense_quadrature_oracle():
    # independent oracle: midpoint rule, 400 points per unit interval
    # (midpoint error ~ (1/400)^2 per interval bounds the tolerance)
    N = 200
    t = zm.sieve_dk(2, N)
    p = zm.main_poly(2)
    pref = np.cumsum(t.values)
    total = 0.0
    for n in range(1, N):
        y = n + (np.arange(400) + 0.5) / 400
        delta = pref[n - 1] - y * p(np.log(y))
        total += np.mean(delta**2)
    curve = zm.delta_mean_square(2, [N], t, p)
    assert curve.cumulative_ms[0][1] == pytest.approx(total, rel=3e-5)


def test_mean_square_cumulative_nondecreasing(d2_1e6):
    Xs = np.geomspace(100, 10**5, 25)
    curve = zm.delta_mean_square(2, Xs, d2_1e6, zm.main_poly(2))
    vals = [v for _, v in curve.cumulative_ms]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_mean_square_partial_interval():
    ones = zm.ones_table(10)
    curve = zm.delta_mean_square(1, [2.5], ones, zm.main_poly(1))
    # int_1^2 {y-1}^2 style sawtooth + partial: int_2^2.5 (2-y)^2 dy
    expect = 1 / 3 + ((0.5) ** 3) / 3
    assert curve.cumulative_ms[0][1] == pytest.approx(expect, rel=1e-12)
