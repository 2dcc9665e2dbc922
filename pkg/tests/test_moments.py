import math

import numpy as np
import pytest

import zetamoments as zm
from zetamoments.moments import (
    exponent_classical,
    BudgetError,
    DegenerateInputError,
    THEORY,
    exponent_sigma_star_weak,
    exponent_experiment,
    exponent_kanemitsu,
    exponent_lindelof,
    exponent_beta_envelope,
    exponent_sigma_star,
    fit_power_law,
    integrate_moment,
    integrate_moment_grid,
    main_term_series,
    main_term_zeta,
    main_term_zeta_direct,
    matsumoto_exponent,
    residual,
    secondary_term,
    theory_exponent,
)


def zeta_real(x):
    return zm.zeta_em(complex(x, 0), 1e-10).value.real


# ---------------------------------------------------------------------------
# main-term constants
# ---------------------------------------------------------------------------

def test_main_term_k1_is_zeta():
    c = main_term_zeta(1, 0.75)
    assert c.value == pytest.approx(zeta_real(1.5), rel=1e-12)
    assert c.tail_bound == 0.0
    assert c.accepted


@pytest.mark.parametrize("sigma", [0.6, 0.75, 0.9])
def test_main_term_k2_identity(sigma):
    # sum d(n)^2 n^{-s} = zeta(s)^4/zeta(2s) via the (1+x)/(1-x)^3 local factor
    c = main_term_zeta(2, sigma)
    ref = zeta_real(2 * sigma) ** 4 / zeta_real(4 * sigma)
    assert c.value == pytest.approx(ref, rel=1e-8)
    assert c.accepted


def test_main_term_monotone_in_sigma():
    for k in (1, 2, 3, 4):
        vals = [main_term_zeta(k, s).value for s in (0.6, 0.7, 0.8, 0.9)]
        assert all(b < a for a, b in zip(vals, vals[1:]))


def test_main_term_divergence_guard():
    with pytest.raises(ValueError):
        main_term_zeta(2, 0.5)


def test_main_term_dual_method_within_tails():
    for k, N in ((1, 10**6), (2, 10**6), (3, 10**6)):
        table = zm.sieve_dk(k, N)
        for sigma in (0.75, 0.9):
            a = main_term_zeta(k, sigma)
            b = main_term_zeta_direct(k, sigma, table)
            assert abs(a.value - b.value) <= a.tail_bound + b.tail_bound, (k, sigma)


def test_eq_1_2_printed_constant_discrepancy():
    # the fourth-moment main term equals zeta^4(2s)/zeta(4s); the printed
    # form zeta^2(2s)/zeta(4s) differs by exactly zeta(2s)^2
    sigma = 0.75
    c = main_term_zeta(2, sigma).value
    printed = zeta_real(2 * sigma) ** 2 / zeta_real(4 * sigma)
    assert c / printed == pytest.approx(zeta_real(2 * sigma) ** 2, rel=1e-8)


def test_main_term_series_delta_table():
    vals = np.zeros(10**5)
    vals[0] = 1.0
    t = zm.CoeffTable("rankin_c", 10**5, vals)
    c = main_term_series(t, 0.75)
    assert c.value == 1.0
    assert c.tail_bound == 0.0


def test_main_term_series_truncation_stability(atilde_16e4):
    half = zm.CoeffTable("a_tilde", atilde_16e4.N // 2,
                         atilde_16e4.values[: atilde_16e4.N // 2])
    full = main_term_series(atilde_16e4, 0.9)
    part = main_term_series(half, 0.9)
    assert abs(full.value - part.value) <= part.tail_bound + full.tail_bound


def test_main_term_series_partial_lower_bound(rankin_16e4):
    t = zm.CoeffTable("rankin_c", rankin_16e4.N, rankin_16e4.c)
    c = main_term_series(t, 0.75)
    n = np.arange(1, 11)
    lower = float(np.sum(rankin_16e4.c[:10] ** 2 * n**-1.5))
    assert c.value > 0
    assert c.value >= lower


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def test_integrate_trivial_interval():
    rec = integrate_moment("zeta", 3, 0.75, 1.0)
    assert rec.integral == 0.0


def test_integrate_additive():
    r100 = integrate_moment("zeta", 1, 0.75, 100.0)
    r200 = integrate_moment("zeta", 1, 0.75, 200.0)
    grid = integrate_moment_grid("zeta", 1, 0.75, [100.0, 200.0])
    gap = (r200.integral - r100.integral) - (grid[1].integral - grid[0].integral)
    assert abs(gap) < 1e-6 * r200.integral


def test_integrate_step_halving_consistency():
    rec = integrate_moment("zeta", 2, 0.75, 200.0, rel_tol=1e-4)
    assert rec.quad_err < 1e-4 * rec.integral


def test_integrate_rejects_bad_args():
    with pytest.raises(ValueError):
        integrate_moment("zeta", 1, 0.4, 100.0)
    with pytest.raises(ValueError):
        integrate_moment("zeta", 1, 0.75, 10**4)
    with pytest.raises(ValueError):
        integrate_moment("nope", 1, 0.75, 100.0)
    with pytest.raises(BudgetError):
        integrate_moment("zeta", 1, 0.75, 1000.0, budget=100)


def test_integrate_workers_deterministic():
    a = integrate_moment_grid("zeta", 1, 0.75, [50.0, 150.0], workers=1)
    b = integrate_moment_grid("zeta", 1, 0.75, [50.0, 150.0], workers=4)
    for x, y in zip(a, b):
        assert x.integral == y.integral and x.quad_err == y.quad_err


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------

def test_residual_synthetic_zero():
    C = main_term_zeta(2, 0.75)
    rec = zm.MomentRecord("zeta", 2, 0.75, 100.0, C.value * 100.0)
    out = residual(rec, C)
    assert out.residual == 0.0
    assert out.main == C.value * 100.0


def test_residual_k1_includes_secondary_term():
    C = main_term_zeta(1, 0.75)
    rec = zm.MomentRecord("zeta", 1, 0.75, 1000.0, C.value * 1000.0)
    out = residual(rec, C)
    sec = secondary_term(0.75, 1000.0)
    assert out.main == pytest.approx(C.value * 1000.0 + sec, rel=1e-12)
    # the secondary coefficient is negative at sigma = 3/4
    assert sec < 0
    assert sec == pytest.approx(
        zeta_real(0.5) * math.gamma(0.5) * math.sin(0.75 * math.pi) / 0.25 * 1000**0.5,
        rel=1e-10,
    )


def test_residual_mismatch_errors():
    C = main_term_zeta(2, 0.75)
    with pytest.raises(ValueError):
        residual(zm.MomentRecord("zeta", 1, 0.75, 10.0, 1.0), C)
    with pytest.raises(ValueError):
        residual(zm.MomentRecord("zeta", 2, 0.8, 10.0, 1.0), C)


def test_residual_k1_bound_at_1000():
    rec = integrate_moment("zeta", 1, 0.75, 1000.0)
    out = residual(rec, main_term_zeta(1, 0.75))
    assert abs(out.residual) <= 5 * 1000 ** (1 / 6) * math.log(1000.0) ** (2 / 9)


# ---------------------------------------------------------------------------
# fits
# ---------------------------------------------------------------------------

def test_fit_exact_square_law():
    fit = fit_power_law([(10, 100), (100, 10**4), (1000, 10**6)], strict=False)
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_synthetic_half_power():
    X = np.geomspace(10, 10**4, 20)
    fit = fit_power_law(list(zip(X, 2.7 * X**0.5)))
    assert fit.slope == pytest.approx(0.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(2.7), abs=1e-12)


def test_fit_signed_values_use_magnitude():
    X = np.geomspace(10, 10**4, 16)
    V = 3 * X**1.5 * np.where(np.arange(16) % 2 == 0, 1, -1)
    fit = fit_power_law(list(zip(X, V)))
    assert fit.slope == pytest.approx(1.5, abs=1e-12)


def test_fit_degenerate_inputs():
    with pytest.raises(DegenerateInputError):
        fit_power_law([(10, 0.0), (100, 0.0)], strict=False)
    with pytest.raises(DegenerateInputError):
        fit_power_law([(10, 1.0), (20, 2.0)])  # strict: too few points
    with pytest.raises(DegenerateInputError):
        fit_power_law([(10, 1.0), (9, 2.0)], strict=False)  # not increasing
    X = np.linspace(10, 20, 10)
    with pytest.raises(DegenerateInputError):
        fit_power_law(list(zip(X, X)))  # strict: span < 1.5 decades


def test_fit_delta2_mean_square_slope(d2_1e6):
    curve = zm.delta_mean_square(2, np.geomspace(10**4, 10**6, 41), d2_1e6, zm.main_poly(2))
    fit = fit_power_law(curve.cumulative_ms)
    assert fit.slope == pytest.approx(1.5, abs=0.05)


# ---------------------------------------------------------------------------
# theory exponents
# ---------------------------------------------------------------------------

def test_theory_zeta_k3_high_sigma():
    assert theory_exponent("zeta", 3, 0.9) == pytest.approx(0.3, abs=1e-14)


def test_theory_zeta_k3_low_sigma():
    # 0.6 > sigma*_3 = 7/12: the sigma* route applies and is the minimum
    v = theory_exponent("zeta", 3, 0.6)
    assert v == pytest.approx(24 * 0.4 / (17 - 12 * 0.6), rel=1e-12)
    assert v == pytest.approx(0.97959, abs=1e-5)


def test_theory_zeta_validity_window():
    with pytest.raises(ValueError):
        theory_exponent("zeta", 7, 0.75)  # outside the tabulated range
    with pytest.raises(ValueError):
        theory_exponent("zeta", 3, 0.45)  # outside the strip
    with pytest.raises(ValueError):
        exponent_sigma_star(3, 0.55)  # below sigma*_3 = 7/12
    # 0.55 < 7/12 but > max(1/3, 1/2): only the beta envelope applies
    assert theory_exponent("zeta", 3, 0.55) == pytest.approx(2 * 0.45 / (2 / 3), rel=1e-12)


def test_theory_zeta_k12_beta_envelope():
    # k = 1, 2 carry the beta-envelope values from the constants table
    assert theory_exponent("zeta", 1, 0.75) == pytest.approx(2 / 3, rel=1e-12)
    assert theory_exponent("zeta", 2, 0.75) == pytest.approx(2 / 3, rel=1e-12)
    # the sharp special-method exponents are separate table entries
    assert exponent_classical(1, 0.75) == pytest.approx(1 / 6, rel=1e-12)
    assert exponent_classical(2, 0.75) == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(ValueError):
        exponent_classical(3, 0.75)


def test_theory_Z():
    assert theory_exponent("Z2", 1, 0.8) == pytest.approx(0.8, rel=1e-12)


def test_theory_F_branches_continuous():
    for fam in ("F2", "F4"):
        lo = theory_exponent(fam, 1, 0.75 - 1e-12)
        hi = theory_exponent(fam, 1, 0.75 + 1e-12)
        assert lo == pytest.approx(hi, abs=1e-9)
    assert theory_exponent("F2", 1, 0.8) == pytest.approx(8 / 3 * 0.2, rel=1e-12)
    assert theory_exponent("F4", 2, 0.8) == pytest.approx(16 / 5 * 0.2, rel=1e-12)


def test_sigma_star_bound_improves_weak_form():
    for k in (3, 4, 5, 6):
        sk = THEORY.sigma_star[k]
        for sigma in np.linspace(sk + 1e-6, 1 - 1e-9, 30):
            assert exponent_sigma_star(k, sigma) <= exponent_sigma_star_weak(k, sigma) + 1e-14


def test_theory_minimum_of_candidates():
    for k in (3, 4, 5, 6):
        for sigma in (0.75, 0.85, 0.95):
            v = theory_exponent("zeta", k, sigma)
            assert v <= exponent_beta_envelope(k, sigma) + 1e-14
            assert v <= exponent_sigma_star(k, sigma) + 1e-14


def test_weak_form_recovers_tabulated_exponents():
    # the classical explicit values (17-12s)/10, (11-8s)/6, ...
    assert exponent_sigma_star_weak(3, 0.7) == pytest.approx((17 - 12 * 0.7) / 10, rel=1e-12)
    assert exponent_sigma_star_weak(4, 0.8) == pytest.approx((11 - 8 * 0.8) / 6, rel=1e-12)
    assert exponent_sigma_star_weak(5, 0.8) == pytest.approx((79 - 60 * 0.8) / 38, rel=1e-12)
    assert exponent_sigma_star_weak(6, 0.8) == pytest.approx((9 - 7 * 0.8) / 4, rel=1e-12)


def test_kanemitsu_and_lindelof_entries():
    assert exponent_kanemitsu(3, 0.8) == pytest.approx(9 * 0.2 / (3 + 2 - 2.4), rel=1e-12)
    with pytest.raises(ValueError):
        exponent_kanemitsu(3, 0.6)  # below 1 - 1/k
    assert exponent_lindelof(2, 0.75) == pytest.approx(8 * 0.25 / 3, rel=1e-12)


def test_matsumoto_pieces():
    assert matsumoto_exponent(0.7) == pytest.approx(4 - 4 * 0.7, rel=1e-12)
    assert matsumoto_exponent(0.78) == pytest.approx(2.5 - 1.56, rel=1e-12)
    assert matsumoto_exponent(0.9) == pytest.approx(60 * 0.1 / (29 - 18), rel=1e-12)
    knee = (12 + math.sqrt(19)) / 20
    assert matsumoto_exponent(knee - 1e-9) == pytest.approx(matsumoto_exponent(knee + 1e-9), abs=1e-6)


def test_theory_constant_maps_monotone():
    bs = [THEORY.beta[k] for k in sorted(THEORY.beta)]
    ss = [THEORY.sigma_star[k] for k in sorted(THEORY.sigma_star)]
    assert bs == sorted(bs) and ss == sorted(ss)
    assert all(0 < v < 1 for v in bs + ss)
    assert THEORY.rho == 0.25 and THEORY.theta == 0.375


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def test_experiment_zeta_k1_small():
    res = exponent_experiment("zeta", 1, 0.75, [100, 200, 400])
    assert res.fit.pass_
    assert res.fit.slope <= res.fit.theory_exponent + res.fit.slack
    assert all(math.isfinite(r.residual) for r in res.records)


def test_experiment_near_half_refuses_to_pass():
    res = exponent_experiment("zeta", 1, 0.52, [50, 100, 200])
    assert res.near_half
    assert res.fit.pass_ is False


def test_experiment_o_of_T():
    res = exponent_experiment("zeta", 1, 0.75, [100, 200, 400, 800])
    ratios = [abs(r.residual) / r.T for r in res.records]
    assert ratios[-1] < ratios[0]
