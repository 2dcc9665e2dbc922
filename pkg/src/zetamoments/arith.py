"""Exact multiplicative-function machinery.

Builds coefficient tables for the generalized divisor functions d_k(n)
(the number of ordered factorizations of n into k factors), performs exact
Dirichlet convolution, computes Stieltjes constants, the summatory main-term
polynomials P_{k-1} with

    D_k(x) = sum_{n<=x} d_k(n) = x P_{k-1}(log x) + Delta_k(x),

and the error-term curves Delta_k(x) together with the cumulative mean
square  int_1^X Delta_k(y)^2 dy.

All d_k tables are exact integers (int64, with an explicit capacity guard);
convolutions of integer tables stay integer.  P_{k-1} is obtained as the
residue at s=1 of zeta(s)^k x^s / s, expanded in powers of log x from the
truncated Laurent series of zeta at 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "CoeffTable",
    "SummatoryPolynomial",
    "DeltaCurve",
    "CapacityError",
    "PrecisionError",
    "sieve_dk",
    "ones_table",
    "dirichlet_convolve",
    "stieltjes_constants",
    "main_poly",
    "delta_k",
    "delta_mean_square",
    "prime_sieve",
]

# int64 capacity guard: keep a couple of bits of headroom below 2^63
_INT64_SAFE = 1 << 61

# Default memory budget for sieves (values), in entries
_SIEVE_BUDGET = 10**8


class CapacityError(Exception):
    """A table request exceeds the configured size/overflow budget."""


class PrecisionError(Exception):
    """A numerical routine cannot reach the requested accuracy."""


@dataclass(frozen=True)
class CoeffTable:
    """A coefficient table a(1..N), the universal carrier for sieves.

    values[i] is the coefficient of n = i+1.  Integer tables are exact
    (int64); real tables are float64.  ``label`` records provenance
    ("d_k", "tau", "a_tilde", "a_tilde_sq_conv", "rankin_c", or a
    convolution expression), ``generator_params`` the named parameters
    (e.g. {"k": 3}).
    """

    label: str
    N: int
    values: np.ndarray
    generator_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.values) != self.N:
            raise ValueError(f"values length {len(self.values)} != N {self.N}")

    @property
    def is_integer(self) -> bool:
        return self.values.dtype.kind == "i"

    def value(self, n: int):
        """Coefficient of n (1-based)."""
        if not 1 <= n <= self.N:
            raise IndexError(f"n={n} outside table range 1..{self.N}")
        return self.values[n - 1]

    def prefix_sums(self) -> np.ndarray:
        """Exact summatory function D(n) = sum_{m<=n} a(m) as float64."""
        c = np.cumsum(self.values, dtype=np.int64 if self.is_integer else np.float64)
        if self.is_integer and abs(int(c[-1])) >= 2**53:
            raise CapacityError("prefix sums exceed exact float64 range")
        return c.astype(np.float64)


@dataclass(frozen=True)
class SummatoryPolynomial:
    """P_{k-1}(u) = sum_j coeffs[j] u^j with u = log x.

    Leading coefficient is 1/(k-1)!.  Q = P + P' (the integrand density
    in d(D_k)) is exposed for callers that integrate against dx.
    """

    k: int
    coeffs: np.ndarray  # c_0 .. c_{k-1}

    def __call__(self, u):
        return np.polyval(self.coeffs[::-1], u)

    def derivative_coeffs(self) -> np.ndarray:
        c = self.coeffs
        return c[1:] * np.arange(1, len(c))

    def q_coeffs(self) -> np.ndarray:
        """Coefficients of Q_{k-1} = P_{k-1} + P'_{k-1}."""
        q = self.coeffs.copy()
        d = self.derivative_coeffs()
        q[: len(d)] += d
        return q


@dataclass(frozen=True)
class DeltaCurve:
    """Sampled error term Delta_k and its cumulative mean square."""

    k: int
    samples: list  # (x, Delta_k(x))
    cumulative_ms: list  # (X, int_1^X Delta_k(y)^2 dy)


def prime_sieve(nmax: int) -> np.ndarray:
    """Primes <= nmax by Eratosthenes."""
    if nmax < 2:
        return np.array([], dtype=np.int64)
    isp = np.ones(nmax + 1, dtype=bool)
    isp[:2] = False
    for i in range(2, int(nmax**0.5) + 1):
        if isp[i]:
            isp[i * i:: i] = False
    return np.nonzero(isp)[0].astype(np.int64)


def ones_table(N: int) -> CoeffTable:
    """The all-ones table (coefficients of zeta); equals d_1."""
    return sieve_dk(1, N)


def sieve_dk(k: int, N: int) -> CoeffTable:
    """Exact d_k(n) for 1 <= n <= N.

    d_k is multiplicative with d_k(p^a) = C(a+k-1, k-1).  The build walks
    prime powers p^a in a vectorized sieve; for every multiple of p^a the
    running value is multiplied by (a+k-1) and divided by a, so a value
    with p-adic valuation v accumulates exactly C(v+k-1, v).  Each division
    is exact in integers (C(a-1+k-1, a-1) * (a+k-1) = a * C(a+k-1, a)).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if N > _SIEVE_BUDGET:
        raise CapacityError(f"N={N} exceeds sieve budget {_SIEVE_BUDGET}")
    # largest d_k value is at most k^log2(N); demand headroom below 2^61
    if N > 2 and k ** min(60, int(math.log2(N)) + 1) >= _INT64_SAFE and k > 1:
        # loose a priori guard; the exact post-check below still runs
        if k > 16:
            raise CapacityError(f"d_{k} at N={N} may overflow int64")
    vals = np.ones(N, dtype=np.int64)
    if k == 1:
        return CoeffTable("d_k", N, vals, {"k": 1})
    for p in prime_sieve(N):
        pa = int(p)
        a = 1
        while pa <= N:
            sl = vals[pa - 1:: pa]
            sl *= a + k - 1
            sl //= a
            a += 1
            if pa > N // p:
                break
            pa *= p
    if int(vals.max()) >= _INT64_SAFE:
        raise CapacityError(f"d_{k} values at N={N} exceed the int64 budget")
    return CoeffTable("d_k", N, vals, {"k": k})


def dirichlet_convolve(a: CoeffTable, b: CoeffTable) -> CoeffTable:
    """(a*b)(n) = sum_{d|n} a(d) b(n/d), exact for integer inputs.

    Integer (x) integer stays int64 with an overflow pre-check; any real
    operand promotes the result to float64.
    """
    if a.N != b.N:
        raise ValueError(f"length mismatch: {a.N} != {b.N}")
    N = a.N
    integer = a.is_integer and b.is_integer
    if integer:
        amax, bmax = int(np.abs(a.values).max()), int(np.abs(b.values).max())
        # bound: |out| <= amax*bmax*d(n); max divisor count below 1e8 is 768
        if amax * bmax > _INT64_SAFE // 768:
            raise CapacityError("integer convolution would risk int64 overflow")
        out = np.zeros(N, dtype=np.int64)
        av = a.values
        bv = b.values
    else:
        out = np.zeros(N, dtype=np.float64)
        av = a.values.astype(np.float64)
        bv = b.values.astype(np.float64)
    for d in range(1, N + 1):
        ad = av[d - 1]
        if ad:
            out[d - 1:: d] += ad * bv[: N // d]
    label = f"({a.label})*({b.label})"
    return CoeffTable(label, N, out, {"left": a.label, "right": b.label})


# ---------------------------------------------------------------------------
# Stieltjes constants and the main-term polynomial
# ---------------------------------------------------------------------------

def stieltjes_constants(J: int, M: int = 80, terms: int = 60) -> list:
    """gamma_0..gamma_J via Euler-Maclaurin on f_j(x) = (log x)^j / x.

    gamma_j = lim_M [ sum_{m<=M} (log m)^j/m - (log M)^{j+1}/(j+1) ].  The
    limit is accelerated with Euler-Maclaurin correction terms at the cut M;
    the derivative polynomials of f_j are generated by the exact recurrence
    c_{r+1,i} = -(r+1) c_{r,i} + (i+1) c_{r,i+1} on (log x)^i / x^{r+1}
    coefficients.  Computed in extended precision (mpmath) because the two
    leading terms cancel catastrophically for large j; returned as floats
    good to at least 12 significant digits.
    """
    if J < 0:
        raise ValueError("J must be >= 0")
    if J > 20:
        raise PrecisionError("J > 20 is outside the configured desk range")
    import mpmath as mp

    with mp.workdps(50):
        out = []
        lnM = mp.log(M)
        # partial sums of (log m)^j / m for all j at once
        logs = [mp.log(m) for m in range(1, M + 1)]
        for j in range(J + 1):
            s = mp.fsum(lg**j / m for m, lg in zip(range(1, M + 1), logs))
            s -= lnM ** (j + 1) / (j + 1)
            # Euler-Maclaurin corrections at x=M for f(x) = (log x)^j / x:
            # -f(M)/2 - sum_r B_2r/(2r)! f^{(2r-1)}(M)
            s -= lnM**j / (2 * M)
            # derivative polynomial coefficients: f^{(r)} = x^{-r-1} sum_i c_i (log x)^i
            c = [mp.mpf(0)] * (j + 1)
            c[j] = mp.mpf(1)
            r = 0
            prev_mag = mp.inf
            for rr in range(1, 2 * terms):
                nc = [mp.mpf(0)] * (j + 1)
                for i in range(j + 1):
                    nc[i] += -(rr) * c[i]
                    if i + 1 <= j:
                        nc[i] += (i + 1) * c[i + 1]
                c = nc
                r = rr
                if r % 2 == 1:
                    rt = (r + 1) // 2  # correction index: f^{(2rt-1)}
                    b = mp.bernoulli(2 * rt)
                    fder = mp.fsum(ci * lnM**i for i, ci in enumerate(c)) / M ** (r + 1)
                    term = b / mp.factorial(2 * rt) * fder
                    s -= term
                    mag = abs(term)
                    if mag < mp.mpf(10) ** (-45):
                        break
                    if mag > prev_mag:
                        # asymptotic series started diverging before target
                        raise PrecisionError(
                            f"Euler-Maclaurin for gamma_{j} stalls at M={M}; raise M"
                        )
                    prev_mag = mag
            out.append(s)
        floats = [float(v) for v in out]
    return floats


def _laurent_zeta_pow_k(k: int, order: int, gammas: Sequence) -> list:
    """Taylor coefficients (mpf) of (u*zeta(1+u))^k / (1+u) up to u^order."""
    import mpmath as mp

    # u*zeta(1+u) = 1 + sum_{j>=1} (-1)^(j-1) gamma_{j-1} u^j / (j-1)!
    a = [mp.mpf(1)] + [
        (-1) ** (j - 1) * mp.mpf(gammas[j - 1]) / mp.factorial(j - 1)
        for j in range(1, order + 1)
    ]

    def mul(x, y):
        out = [mp.mpf(0)] * (order + 1)
        for i, xi in enumerate(x):
            if xi:
                for j in range(0, order + 1 - i):
                    out[i + j] += xi * y[j]
        return out

    p = [mp.mpf(1)] + [mp.mpf(0)] * order
    for _ in range(k):
        p = mul(p, a)
    inv = [mp.mpf((-1) ** j) for j in range(order + 1)]  # 1/(1+u)
    return mul(p, inv)


def main_poly(k: int) -> SummatoryPolynomial:
    """P_{k-1} as the residue at s=1 of zeta(s)^k x^s / s.

    Writing s = 1+u, the residue is x * [u^{k-1}] (u zeta(1+u))^k e^{u log x}
    / (1+u), i.e. P_{k-1}(L) = sum_m b_{k-1-m} L^m / m! with b_i the Taylor
    coefficients of (u zeta(1+u))^k/(1+u).  The Laurent series is truncated
    at order k+5 and the truncation is certified by recomputing at order
    k+7 (coefficients must move by < 1e-10).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > 10:
        raise PrecisionError("k > 10 is outside the configured desk range")
    import mpmath as mp

    order = k + 5
    gammas = stieltjes_constants(order + 2)
    b1 = _laurent_zeta_pow_k(k, order, gammas)
    b2 = _laurent_zeta_pow_k(k, order + 2, gammas)
    coeffs = []
    for m in range(k):
        c1 = b1[k - 1 - m] / mp.factorial(m)
        c2 = b2[k - 1 - m] / mp.factorial(m)
        if abs(c1 - c2) > 1e-10:
            raise PrecisionError(f"Laurent truncation unstable for k={k}")
        coeffs.append(float(c2))
    return SummatoryPolynomial(k, np.array(coeffs))


# ---------------------------------------------------------------------------
# Error terms and mean squares
# ---------------------------------------------------------------------------

def delta_k(k: int, x: float, table: CoeffTable, poly: SummatoryPolynomial) -> float:
    """Delta_k(x) = D_k(x) - x P_{k-1}(log x), exact summatory via the table."""
    if x < 1 or x > table.N:
        raise ValueError(f"x={x} outside table range [1, {table.N}]")
    if poly.k != k or table.generator_params.get("k") not in (None, k):
        raise ValueError("k mismatch between table/polynomial and request")
    D = float(table.prefix_sums()[int(x) - 1])
    return D - x * float(poly(math.log(x)))


# Gauss-Legendre nodes on [0,1], fixed order 8 (deterministic mean squares)
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_X = (_GL_X + 1.0) / 2.0
_GL_W = _GL_W / 2.0


def delta_mean_square(
    k: int,
    Xs: Sequence[float],
    table: CoeffTable,
    poly: SummatoryPolynomial,
) -> DeltaCurve:
    """Cumulative mean square int_1^X Delta_k(y)^2 dy on the grid Xs.

    Between consecutive integers Delta_k(y) = D_k(n) - y P_{k-1}(log y) is
    smooth, so each unit interval is integrated with fixed-order Gauss
    quadrature (order 8, exact for the polynomial part and far below the
    sampling error otherwise); partial end intervals are rescaled.
    """
    Xs = sorted(float(X) for X in Xs)
    if Xs[0] < 1:
        raise ValueError("X grid must start at >= 1")
    if Xs[-1] > table.N:
        raise ValueError(f"max X {Xs[-1]} exceeds table length {table.N}")
    pref = table.prefix_sums()
    nmax = int(Xs[-1])
    ns = np.arange(1, nmax + 1, dtype=np.float64)

    def unit_integrals(lo: np.ndarray, width: np.ndarray, dvals: np.ndarray):
        # integral over [lo, lo+width) of (D - y P(log y))^2 dy, vectorized
        y = lo[:, None] + width[:, None] * _GL_X[None, :]
        main = y * np.polyval(poly.coeffs[::-1], np.log(y))
        dlt = dvals[:, None] - main
        return width * ((dlt * dlt) @ _GL_W)

    # whole unit intervals [n, n+1) for n = 1..nmax-1 (D constant = D(n))
    whole = unit_integrals(ns[:-1], np.ones(nmax - 1), pref[: nmax - 1])
    cum = np.concatenate([[0.0], np.cumsum(whole)])  # cum[i] = int_1^{1+i}

    samples = []
    cumulative = []
    for X in Xs:
        nfl = int(X)
        val = cum[min(nfl, nmax) - 1]
        if X > nfl and nfl <= nmax:
            frac = unit_integrals(
                np.array([float(nfl)]), np.array([X - nfl]), pref[nfl - 1: nfl]
            )
            val += float(frac[0])
        D = float(pref[min(nfl, nmax) - 1])
        samples.append((X, D - X * float(poly(math.log(X)))))
        cumulative.append((X, float(val)))
    return DeltaCurve(k, samples, cumulative)
