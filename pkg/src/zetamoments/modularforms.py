"""Exact coefficients of the weight-12 cusp form and the Rankin-Selberg data.

Ramanujan tau via the eta product: tau(n) is the coefficient of q^n in
q prod_{m>=1} (1-q^m)^24.  The Euler product E = prod (1-q^m) is built
sparsely from the pentagonal-number theorem, cubed (and checked against
Jacobi's identity E^3 = sum (-1)^m (2m+1) q^{m(m+1)/2}), then squared three
times: E^24 = ((E^3)^2)^2)^2.  The two dense squarings run through Kronecker
substitution (coefficients packed into one huge integer, one big-int
multiply), so the whole table is exact arbitrary-precision integers.

Derived tables: the Deligne-normalized a~(n) = tau(n) n^{-11/2}, the
self-convolution a~*a~ (coefficients of F^2), and the Rankin-Selberg
coefficients c_n = sum_{d^2 m = n} a~(m)^2 with

    sum_{n<=x} c_n = A x + Delta(x, phi).

A is estimated by Cesaro smoothing averaged over the top three dyadic cuts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arith import CapacityError, CoeffTable, SummatoryPolynomial, delta_mean_square

try:
    import gmpy2

    def _big(x):
        return gmpy2.mpz(x)
except ImportError:  # pure-Python big ints are ~20x slower but exact
    def _big(x):
        return x

__all__ = [
    "TauTable",
    "RankinData",
    "DeligneBoundError",
    "tau_table",
    "normalize",
    "self_convolve",
    "rankin_c",
    "rankin_A",
    "delta_phi",
    "delta_phi_mean_square",
]

_TAU_BUDGET = 2 * 10**5


class DeligneBoundError(Exception):
    """|a~(n)| > d(n): the tau table is corrupt."""


@dataclass(frozen=True)
class TauTable:
    """Exact tau(1..N) as arbitrary-precision integers."""

    N: int
    tau: list

    def value(self, n: int) -> int:
        return self.tau[n - 1]


@dataclass
class RankinData:
    """Rankin-Selberg coefficients c_n plus the average A and Delta(x,phi)."""

    N: int
    c: np.ndarray
    A_estimate: float | None = None
    A_spread: float | None = None
    delta_phi_samples: list = field(default_factory=list)


def _pentagonal(N: int):
    """Sparse prod(1-q^m) to degree N: (positions, +-1 coefficients)."""
    pos, coef = [0], [1]
    j = 1
    while j * (3 * j - 1) // 2 <= N:
        s = -1 if j % 2 else 1
        g1 = j * (3 * j - 1) // 2
        g2 = j * (3 * j + 1) // 2
        pos.append(g1)
        coef.append(s)
        if g2 <= N:
            pos.append(g2)
            coef.append(s)
        j += 1
    return np.array(pos, dtype=np.int64), np.array(coef, dtype=np.int64)


def _sparse_square(pos: np.ndarray, coef: np.ndarray, N: int) -> np.ndarray:
    out = np.zeros(N + 1, dtype=np.int64)
    for p, c in zip(pos, coef):
        sel = pos <= N - p
        np.add.at(out, p + pos[sel], c * coef[sel])
    return out


def _dense_times_sparse(dense: np.ndarray, pos, coef, N: int) -> np.ndarray:
    out = np.zeros(N + 1, dtype=np.int64)
    for p, c in zip(pos, coef):
        out[p:] += c * dense[: N + 1 - p]
    return out


def _kronecker_square(a: np.ndarray, N: int) -> list:
    """Truncated square of an int64 series via one packed big-int multiply.

    Signed coefficients are split a = P - Q with nonnegative parts; then
    a^2 = (P^2 + Q^2) - 2PQ slot-by-slot.  Slot width is sized from the
    worst-case convolution bound (N+1) max|a|^2, so slots never carry.
    """
    amax = int(np.abs(a).max())
    B = ((N + 1) * amax * amax).bit_length() // 8 + 2
    ln = len(a)

    def pack(v: np.ndarray):
        buf = np.zeros((ln, B), dtype=np.uint8)
        m = min(8, B)
        buf[:, :m] = v.astype("<u8").view(np.uint8).reshape(ln, 8)[:, :m]
        return _big(int.from_bytes(buf.tobytes(), "little"))

    P = pack(np.where(a > 0, a, 0).astype(np.uint64))
    Q = pack(np.where(a < 0, -a, 0).astype(np.uint64))
    plus = int(P * P + Q * Q)
    minus = int((P * Q) << 1)
    nb = max(plus.bit_length(), minus.bit_length()) // 8 + B
    rp = plus.to_bytes(nb, "little")
    rm = minus.to_bytes(nb, "little")
    return [
        int.from_bytes(rp[i * B: (i + 1) * B], "little")
        - int.from_bytes(rm[i * B: (i + 1) * B], "little")
        for i in range(N + 1)
    ]


def tau_table(N: int) -> TauTable:
    """Exact tau(1..N) from the eta product (one cube, three squarings)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if N > _TAU_BUDGET:
        raise CapacityError(f"N={N} exceeds the exact big-integer budget {_TAU_BUDGET}")
    M = N - 1  # degree needed in E^24
    if M == 0:
        return TauTable(1, [1])
    pos, coef = _pentagonal(M)
    e2 = _sparse_square(pos, coef, M)
    e3 = _dense_times_sparse(e2, pos, coef, M)
    _check_jacobi(e3, M)
    nz = np.nonzero(e3)[0]
    e6 = _sparse_square(nz, e3[nz], M)
    e12 = np.array(_kronecker_square(e6, M), dtype=np.int64)
    e24 = _kronecker_square(e12, M)
    return TauTable(N, [int(v) for v in e24[:N]])


def _check_jacobi(e3: np.ndarray, M: int) -> None:
    # E^3 = sum_m (-1)^m (2m+1) q^{m(m+1)/2}
    ref = np.zeros(M + 1, dtype=np.int64)
    m = 0
    while m * (m + 1) // 2 <= M:
        ref[m * (m + 1) // 2] = (-1 if m % 2 else 1) * (2 * m + 1)
        m += 1
    if not np.array_equal(e3, ref):
        raise AssertionError("eta-product cube fails Jacobi's identity")


def normalize(tau: TauTable, kappa: int = 12) -> CoeffTable:
    """a~(n) = tau(n) n^{(1-kappa)/2} as float64; verifies Deligne exactly.

    The bound |a~(n)| <= d(n) is checked in exact integer arithmetic as
    tau(n)^2 <= d(n)^2 n^11 before any float conversion.
    """
    if kappa != 12:
        raise ValueError("only the weight-12 form (kappa=12) is supported")
    from .arith import sieve_dk

    N = tau.N
    d = sieve_dk(2, N).values
    for n in range(1, N + 1):
        t = tau.tau[n - 1]
        if t * t > int(d[n - 1]) ** 2 * n**11:
            raise DeligneBoundError(f"|a~({n})| > d({n}): tau table corrupt")
    vals = np.array([float(t) for t in tau.tau]) * np.arange(1, N + 1, dtype=np.float64) ** (-5.5)
    return CoeffTable("a_tilde", N, vals, {"kappa": 12})


def self_convolve(a_tilde: CoeffTable) -> CoeffTable:
    """(a~*a~)(n) = sum_{d|n} a~(d) a~(n/d), the coefficients of F^2."""
    if a_tilde.values.dtype.kind != "f":
        raise ValueError("self_convolve expects the real-variant a~ table")
    N = a_tilde.N
    v = a_tilde.values
    out = np.zeros(N, dtype=np.float64)
    for d in range(1, N + 1):
        out[d - 1:: d] += v[d - 1] * v[: N // d]
    return CoeffTable("a_tilde_sq_conv", N, out, {"kappa": 12})


def rankin_c(a_tilde: CoeffTable) -> RankinData:
    """c_n = sum_{d^2 m = n} a~(m)^2 (Dirichlet product of zeta(2s) with a~^2)."""
    N = a_tilde.N
    asq = a_tilde.values**2
    c = np.zeros(N, dtype=np.float64)
    d = 1
    while d * d <= N:
        d2 = d * d
        m = N // d2
        c[d2 - 1:: d2] += asq[:m]
        d += 1
    return RankinData(N, c)


def rankin_A(rd: RankinData, X: float) -> float:
    """Estimate A in sum_{n<=x} c_n = A x + Delta(x,phi) by Cesaro smoothing.

    A ~ (2/X) sum_{n<=X} c_n (1 - n/X), averaged over the top three dyadic
    cuts X, X/2, X/4; the dyadic spread is stored and must stay below 5%.
    """
    X = int(X)
    if not 8 <= X <= rd.N:
        raise ValueError(f"X={X} outside table range")
    ests = []
    for cut in (X, X // 2, X // 4):
        n = np.arange(1, cut + 1, dtype=np.float64)
        ests.append(2.0 / cut * float(np.sum(rd.c[:cut] * (1.0 - n / cut))))
    A = float(np.mean(ests))
    spread = (max(ests) - min(ests)) / A
    if spread > 0.05:
        raise ValueError(
            f"Cesaro estimate unstable: dyadic spread {spread:.2%} > 5% (X too small)"
        )
    rd.A_estimate = A
    rd.A_spread = spread
    return A


def delta_phi(rd: RankinData, x: float) -> float:
    """Delta(x, phi) = sum_{n<=x} c_n - A x (requires a prior rankin_A)."""
    if rd.A_estimate is None:
        raise RuntimeError("A_estimate not set; call rankin_A first")
    if not 1 <= x <= rd.N:
        raise ValueError(f"x={x} outside table range")
    val = float(np.sum(rd.c[: int(x)])) - rd.A_estimate * x
    rd.delta_phi_samples.append((x, val))
    return val


def delta_phi_mean_square(rd: RankinData, Xs) -> list:
    """Cumulative int_1^X Delta(x,phi)^2 dx on the grid Xs.

    Reuses the divisor-problem quadrature with the degree-0 main polynomial
    P(u) = A, i.e. main term A*x; Gauss order 8 is exact here since the
    integrand is piecewise quadratic.
    """
    if rd.A_estimate is None:
        raise RuntimeError("A_estimate not set; call rankin_A first")
    table = CoeffTable("rankin_c", rd.N, rd.c)
    poly = SummatoryPolynomial(1, np.array([rd.A_estimate]))
    curve = delta_mean_square(1, Xs, table, poly)
    rd.delta_phi_samples.extend(curve.samples)
    return curve.cumulative_ms
