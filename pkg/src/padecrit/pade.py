"""Simultaneous (type II) Hermite-Pade approximations to polylogarithms.

For a depth k, m distinct nonzero shifts alpha_1..alpha_m and a level n, the
construction produces one common denominator polynomial V0 and an m x k grid
of numerators W[i][j], all of degree at most k*m*n with exact rational
coefficients, such that

    V0(z) * Li_{j+1}(-alpha_i z) - W[i][j](z)   vanishes to order k*m*n + n + 1

at z = 0.  Everything here is exact; the only floating point enters when the
linear forms are evaluated at z = 1.

V0 is always computed by two independent routes (reversal of the derivative
chain, and the explicit multi-sum) and the two must agree coefficientwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import mpmath as mp

from .arith import (
    BigFloat,
    InternalInconsistencyError,
    Poly,
    binomial,
    lcm_upto,
    polylog,
    to_mpf,
)


def _check_alphas(alphas) -> tuple:
    out = tuple(Fraction(a) for a in alphas)
    if any(a == 0 for a in out):
        raise ValueError("shifts alpha_i must be nonzero")
    if len(set(out)) != len(out):
        raise ValueError("shifts alpha_i must be pairwise distinct")
    return out


def build_U_chain(k: int, m: int, n: int, alphas) -> list:
    """The derivative chain U_0..U_k.

    U_0 = prod_i (z + alpha_i)^(k n); each later term applies
    p -> (1/n!) d^n/dz^n (z^n p), which preserves degree k*m*n.
    """
    if k < 1 or m < 1 or n < 0:
        raise ValueError("need k >= 1, m >= 1, n >= 0")
    alphas = _check_alphas(alphas)
    if len(alphas) != m:
        raise ValueError("need exactly m shifts")
    u = Poly.one()
    for a in alphas:
        u = u * Poly((a, 1)) ** (k * n)
    chain = [u]
    fact_n = math.factorial(n)
    for _ in range(k):
        u = u.shift(n).derivative(n).scale(Fraction(1, fact_n))
        chain.append(u)
    return chain


def _multisum_terms(k: int, m: int, n: int, alphas):
    """Yield (powers l_1..l_m, L = sum l_i, shared coefficient) over the grid.

    The shared coefficient is C(n+L, n)^k * prod_i C(kn, l_i) * alpha_i^(kn - l_i).
    """
    kn = k * n
    binom_row = [binomial(kn, l) for l in range(kn + 1)]
    alpha_pows = [
        [a ** (kn - l) for l in range(kn + 1)] for a in alphas
    ]
    central = [Fraction(binomial(n + big_l, n)) ** k for big_l in range(m * kn + 1)]
    for ls in product(range(kn + 1), repeat=m):
        big_l = sum(ls)
        coeff = central[big_l]
        for i, l in enumerate(ls):
            coeff *= binom_row[l] * alpha_pows[i][l]
        yield ls, big_l, coeff


def build_V0(k: int, m: int, n: int, alphas) -> Poly:
    """Common denominator V0, by both routes, returned only on agreement.

    Route 1 reverses U_k: V0(z) = z^(kmn) U_k(1/z).  Route 2 accumulates the
    explicit multi-sum.  Disagreement raises InternalInconsistencyError.
    """
    alphas = _check_alphas(alphas)
    chain = build_U_chain(k, m, n, alphas)
    deg = k * m * n
    by_reversal = chain[k].reversed(deg)

    coeffs = [Fraction(0)] * (deg + 1)
    for _, big_l, coeff in _multisum_terms(k, m, n, alphas):
        coeffs[deg - big_l] += coeff
    by_multisum = Poly(coeffs)

    if by_reversal != by_multisum:
        raise InternalInconsistencyError(
            "V0 reversal and multi-sum routes disagree"
        )
    return by_multisum


def build_W(k: int, m: int, n: int, alphas) -> list:
    """Numerator grid; W[i][j] pairs with Li_{j+1}(-alpha_i z).

    Every monomial carries a positive power of z, so W[i][j](0) = 0.
    """
    alphas = _check_alphas(alphas)
    deg = k * m * n
    grid = [[[Fraction(0)] * (deg + 1) for _ in range(k)] for _ in range(m)]
    max_s = m * k * n
    alpha_s_pows = []
    for a in alphas:
        pows = [Fraction(1)] * (max_s + 1)
        for s in range(1, max_s + 1):
            pows[s] = pows[s - 1] * a
        alpha_s_pows.append(pows)

    for _, big_l, coeff in _multisum_terms(k, m, n, alphas):
        if big_l == 0:
            continue
        base_power = deg - big_l
        for i in range(m):
            pows = alpha_s_pows[i]
            for s in range(1, big_l + 1):
                term = coeff * pows[s]
                if s % 2 == 0:
                    term = -term
                z_power = s + base_power
                for j in range(k):
                    term /= s
                    grid[i][j][z_power] += term
    return [[Poly(cs) for cs in row] for row in grid]


@dataclass(frozen=True)
class PadeSystem:
    """One constructed approximation system; immutable after build."""

    k: int
    m: int
    n: int
    alphas: tuple
    V0: Poly
    W: tuple  # m x k grid of Poly

    @property
    def order(self) -> int:
        """Vanishing order at z = 0: the forms are O(z^order)."""
        return self.k * self.m * self.n + self.n + 1


def polylog_series(j: int, alpha: Fraction, degree: int) -> Poly:
    """Truncated series of Li_j(-alpha z) through z^degree, exact."""
    coeffs = [Fraction(0)] * (degree + 1)
    power = Fraction(1)
    for l in range(1, degree + 1):
        power *= -alpha
        coeffs[l] = power / Fraction(l) ** j
    return Poly(coeffs)


def verify_order(sys: PadeSystem):
    """Expand V0 * Li_{j+1}(-alpha_i z) - W[i][j] exactly through z^(kmn+n).

    Returns (True, None) when every coefficient in that range vanishes for
    every pair (i, j); otherwise (False, (i, j, power)) for the first nonzero
    remainder coefficient (1-based i, j).
    """
    top = sys.order - 1
    for i, a in enumerate(sys.alphas):
        for j in range(sys.k):
            series = polylog_series(j + 1, a, top)
            remainder = sys.V0 * series - sys.W[i][j]
            for power in range(top + 1):
                if remainder.coeff(power) != 0:
                    return False, (i + 1, j + 1, power)
    return True, None


def build_system(k: int, m: int, n: int, alphas) -> PadeSystem:
    """Construct and fully validate a system (dual-route V0, order check)."""
    alphas = _check_alphas(alphas)
    v0 = build_V0(k, m, n, alphas)
    w = build_W(k, m, n, alphas)
    sys = PadeSystem(k=k, m=m, n=n, alphas=alphas, V0=v0,
                     W=tuple(tuple(row) for row in w))
    ok, failure = verify_order(sys)
    if not ok:
        raise InternalInconsistencyError(
            f"order condition failed at (i, j, power) = {failure}"
        )
    return sys


@dataclass(frozen=True)
class LinearForm:
    """One evaluated form V0(1) Li - W(1) together with its a priori bound."""

    i: int
    j: int
    eps: BigFloat
    bound: BigFloat
    within_bound: bool


def linear_form_bound(sys: PadeSystem, i: int, j: int, precision_bits: int):
    """A priori bound Li_j(|a|) |a|^((km+1)n) max_l C(n+ml,n)^k C(kn,l)^m."""
    a = abs(sys.alphas[i])
    k, m, n = sys.k, sys.m, sys.n
    peak = max(
        Fraction(binomial(n + m * l, n)) ** k * Fraction(binomial(k * n, l)) ** m
        for l in range(k * n + 1)
    )
    li = polylog(j + 1, a, precision_bits) if a != 0 else None
    with mp.workprec(precision_bits):
        return li.value * to_mpf(a ** ((k * m + 1) * n) * peak, precision_bits)


def linear_forms_at_one(sys: PadeSystem, precision_bits: int) -> list:
    """Evaluate all forms at z = 1 and check them against the a priori bound.

    The exact parts V0(1) and W(1) are rationals; only the polylogarithm is
    approximate.  It is evaluated with enough guard bits that the returned
    value has absolute error below 2^-(precision_bits + 32) even after the
    catastrophic cancellation.
    """
    if any(abs(a) >= 1 for a in sys.alphas):
        raise ValueError("linear forms at z = 1 need |alpha_i| < 1")
    v0_at_1 = sys.V0(Fraction(1))
    v0_bits = max(v0_at_1.numerator.bit_length(), v0_at_1.denominator.bit_length())
    out = []
    for i, a in enumerate(sys.alphas):
        for j in range(sys.k):
            w_at_1 = sys.W[i][j](Fraction(1))
            bound = linear_form_bound(sys, i, j, precision_bits)
            with mp.workprec(precision_bits):
                bound_bits = max(0, int(-mp.log(bound, 2)) + 1) if bound > 0 else 0
            work = precision_bits + v0_bits + bound_bits + 64
            li = polylog(j + 1, -a, work)
            with mp.workprec(work):
                eps = to_mpf(v0_at_1, work) * li.value - to_mpf(w_at_1, work)
            with mp.workprec(precision_bits):
                eps_r = +eps
                ok = bool(abs(eps_r) <= bound * (1 + mp.mpf(2) ** (-precision_bits // 2)))
            out.append(
                LinearForm(
                    i=i + 1,
                    j=j + 1,
                    eps=BigFloat(eps_r, precision_bits),
                    bound=BigFloat(+bound, precision_bits),
                    within_bound=ok,
                )
            )
    return out


# --- the worked five-number example (k = 2, m = 2, shifts -1/q, -2/q) ------


@dataclass(frozen=True)
class Example1System:
    """Exact coefficient data of the five-number system at level n.

    u1 multiplies every target; v1, v2 pair with Li_1, Li_2 at 1/q and w1, w2
    with Li_1, Li_2 at 2/q.  Multiplying all five by q^(4n) d_{4n}^2 clears
    every denominator.
    """

    q: int
    n: int
    alpha: Fraction
    beta: Fraction
    u1: Fraction
    v1: Fraction
    v2: Fraction
    w1: Fraction
    w2: Fraction

    def scaled(self) -> tuple:
        """The five coefficients times q^(4n) d_{4n}^2 (integers)."""
        factor = Fraction(self.q) ** (4 * self.n) * lcm_upto(max(1, 4 * self.n)) ** 2
        return tuple(factor * x for x in (self.u1, self.v1, self.v2, self.w1, self.w2))


def example1_u_poly(q: int, n: int) -> Poly:
    """The explicit double sum for the level-n common coefficient polynomial."""
    alpha = Fraction(-1, q)
    beta = Fraction(-2, q)
    deg = 4 * n
    coeffs = [Fraction(0)] * (deg + 1)
    row = [binomial(2 * n, p) for p in range(2 * n + 1)]
    apow = [alpha**p for p in range(2 * n + 1)]
    bpow = [beta**p for p in range(2 * n + 1)]
    for p in range(2 * n + 1):
        for r in range(2 * n + 1):
            c = Fraction(row[p] * row[r]) * Fraction(binomial(5 * n - p - r, n)) ** 2
            coeffs[deg - p - r] += c * apow[p] * bpow[r]
    return Poly(coeffs)


def _moment_values(u: Poly, gamma: Fraction) -> tuple:
    """Termwise z = 1 values of the two kernel integrals against u.

    Uses int_0^1 t^l dt = 1/(l+1) and int_0^1 t^l (-log t) dt = 1/(l+1)^2;
    the log-weight sign is chosen so the depth-2 value matches the numerator
    polynomial at 1 (see the construction cross-check).
    """
    first = Fraction(0)
    second = Fraction(0)
    gpow = [gamma**s for s in range(u.degree + 1)]
    for c, uc in enumerate(u.coeffs):
        if uc == 0:
            continue
        for s in range(1, c + 1):
            term = gpow[s] if s % 2 == 1 else -gpow[s]
            first += uc * term / s
            second += uc * term / (s * s)
    return first, second


def build_example1(q: int, n: int) -> Example1System:
    """Build the level-n five-number system with all cross-checks.

    The double-sum polynomial must equal the end of the derivative chain, its
    value at 1 must equal V0(1) of the generic (k=2, m=2) system, and the four
    moment values must equal the corresponding W[i][j](1).
    """
    if abs(q) < 3:
        raise ValueError("need |q| >= 3")
    if n < 0:
        raise ValueError("need n >= 0")
    alpha = Fraction(-1, q)
    beta = Fraction(-2, q)

    u = example1_u_poly(q, n)
    chain = build_U_chain(2, 2, n, (alpha, beta))
    if chain[2] != u:
        raise InternalInconsistencyError(
            "double-sum polynomial differs from the derivative chain"
        )
    sys = build_system(2, 2, n, (alpha, beta))
    u1 = u(Fraction(1))
    if u1 != sys.V0(Fraction(1)):
        raise InternalInconsistencyError("u(1) differs from V0(1)")

    v1, v2 = _moment_values(u, alpha)
    w1, w2 = _moment_values(u, beta)
    expect = {
        "v1": (v1, sys.W[0][0](Fraction(1))),
        "v2": (v2, sys.W[0][1](Fraction(1))),
        "w1": (w1, sys.W[1][0](Fraction(1))),
        "w2": (w2, sys.W[1][1](Fraction(1))),
    }
    for name, (got, want) in expect.items():
        if got != want:
            raise InternalInconsistencyError(
                f"moment value {name} differs from the numerator value at 1"
            )
    return Example1System(q=q, n=n, alpha=alpha, beta=beta,
                          u1=u1, v1=v1, v2=v2, w1=w1, w2=w2)


# --- JSON serialization (integers as decimal strings) ----------------------


def _poly_to_json(p: Poly):
    return [[str(c.numerator), str(c.denominator)] for c in p.coeffs]


def _poly_from_json(doc) -> Poly:
    return Poly([Fraction(int(num), int(den)) for num, den in doc])


def system_to_json(sys: PadeSystem) -> dict:
    return {
        "k": sys.k,
        "m": sys.m,
        "n": sys.n,
        "alphas": [[str(a.numerator), str(a.denominator)] for a in sys.alphas],
        "V0": _poly_to_json(sys.V0),
        "W": [[_poly_to_json(w) for w in row] for row in sys.W],
    }


def system_from_json(doc: dict, validate: bool = True) -> PadeSystem:
    alphas = tuple(Fraction(int(num), int(den)) for num, den in doc["alphas"])
    sys = PadeSystem(
        k=int(doc["k"]),
        m=int(doc["m"]),
        n=int(doc["n"]),
        alphas=alphas,
        V0=_poly_from_json(doc["V0"]),
        W=tuple(tuple(_poly_from_json(w) for w in row) for row in doc["W"]),
    )
    if validate:
        ok, failure = verify_order(sys)
        if not ok:
            raise ValueError(f"imported system violates the order condition at {failure}")
    return sys
