"""Exact scalar arithmetic: big rationals, dense rational polynomials,
tracked-precision floats, and the handful of number-theoretic helpers the
rest of the package leans on.

All rational arithmetic goes through ``fractions.Fraction`` (always in lowest
terms, positive denominator, never rounded).  Approximate values are mpmath
floats wrapped in :class:`BigFloat` so the working precision travels with the
number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

Rational = Fraction


class InternalInconsistencyError(RuntimeError):
    """Two independent computation routes disagreed; an implementation bug."""


class PrecisionError(RuntimeError):
    """A value failed to stabilise after the allowed precision escalations."""


def lcm_upto(n: int) -> int:
    """Least common multiple of 1, ..., n (often written d_n)."""
    if n < 1:
        raise ValueError("lcm_upto requires n >= 1")
    out = 1
    for i in range(2, n + 1):
        out = out * i // math.gcd(out, i)
    return out


def binomial(n: int, k: int) -> int:
    """C(n, k) with the convention that out-of-range k gives 0."""
    if n < 0:
        raise ValueError("binomial requires n >= 0")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


class Poly:
    """Dense univariate polynomial with exact rational coefficients.

    ``coeffs[i]`` is the coefficient of z**i; trailing zeros are stripped so
    the leading coefficient of a nonzero polynomial is nonzero.  The zero
    polynomial has an empty coefficient list and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [_as_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def zero(cls) -> "Poly":
        return cls(())

    @classmethod
    def one(cls) -> "Poly":
        return cls((1,))

    @classmethod
    def x(cls) -> "Poly":
        return cls((0, 1))

    @classmethod
    def monomial(cls, power: int, coeff=1) -> "Poly":
        if power < 0:
            raise ValueError("monomial power must be nonnegative")
        return cls((0,) * power + (coeff,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, i: int) -> Fraction:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return Fraction(0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if self.is_zero() or other.is_zero():
            return Poly.zero()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Poly":
        if exponent < 0:
            raise ValueError("negative polynomial power")
        result = Poly.one()
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def scale(self, c) -> "Poly":
        c = _as_fraction(c)
        return Poly([c * a for a in self.coeffs])

    def shift(self, k: int) -> "Poly":
        """Multiply by z**k."""
        if self.is_zero():
            return self
        return Poly((Fraction(0),) * k + self.coeffs)

    def derivative(self, times: int = 1) -> "Poly":
        if times < 0:
            raise ValueError("derivative order must be nonnegative")
        cs = self.coeffs
        for _ in range(times):
            cs = tuple(i * cs[i] for i in range(1, len(cs)))
            if not cs:
                break
        return Poly(cs)

    def reversed(self, degree: int | None = None) -> "Poly":
        """z**d * p(1/z) for d = max(degree, deg p)."""
        d = self.degree if degree is None else degree
        if d < self.degree:
            raise ValueError("reversal degree below polynomial degree")
        out = [Fraction(0)] * (d + 1)
        for i, c in enumerate(self.coeffs):
            out[d - i] = c
        return Poly(out)

    def truncate(self, degree: int) -> "Poly":
        return Poly(self.coeffs[: degree + 1])

    def __call__(self, x):
        """Horner evaluation; works for Fraction, int, mpf and mpc inputs."""
        if not self.coeffs:
            return 0 * x if not isinstance(x, (int, Fraction)) else Fraction(0)
        if isinstance(x, (int, Fraction)):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        acc = mp.mpf(0)
        for c in reversed(self.coeffs):
            acc = acc * x + mp.mpf(c.numerator) / mp.mpf(c.denominator)
        return acc

    def __repr__(self):
        if self.is_zero():
            return "Poly(0)"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                parts.append(str(c))
            elif i == 1:
                parts.append(f"{c}*z")
            else:
                parts.append(f"{c}*z^{i}")
        return "Poly(" + " + ".join(parts) + ")"


def poly_derivative(p: Poly, times: int = 1) -> Poly:
    """Exact times-fold formal derivative."""
    return p.derivative(times)


@dataclass(frozen=True)
class BigFloat:
    """An mpmath float together with the binary precision it was computed at.

    Operations on BigFloats never silently change precision; anything that
    needs a different precision recomputes from exact inputs.
    """

    value: object  # mpmath.mpf
    precision_bits: int

    def __post_init__(self):
        if self.precision_bits < 1:
            raise ValueError("precision_bits must be positive")

    def __float__(self) -> float:
        return float(self.value)

    def __abs__(self) -> "BigFloat":
        return BigFloat(abs(self.value), self.precision_bits)

    def __repr__(self):
        with mp.workprec(self.precision_bits):
            s = mp.nstr(self.value, max(6, self.precision_bits // 8))
        return f"BigFloat({s}, bits={self.precision_bits})"

    def digits(self, n: int = 20) -> str:
        with mp.workprec(self.precision_bits):
            return mp.nstr(self.value, n)


def to_mpf(x, precision_bits: int):
    """Round an exact rational (or pass an mpf through) at the given precision."""
    with mp.workprec(precision_bits):
        if isinstance(x, Fraction):
            return mp.mpf(x.numerator) / mp.mpf(x.denominator)
        return mp.mpf(x)


def stable_value(fn, precision_bits: int, max_escalations: int = 3) -> BigFloat:
    """Evaluate ``fn(prec) -> mpf`` at p and 2p and accept only on agreement.

    Agreement means the two runs differ by at most 2**(4-p) relatively; on
    disagreement the precision doubles, up to ``max_escalations`` times.
    """
    p = precision_bits
    for _ in range(max_escalations + 1):
        lo = fn(p)
        hi = fn(2 * p)
        with mp.workprec(2 * p):
            scale = max(mp.mpf(1), abs(hi))
            if abs(lo - hi) <= scale * mp.mpf(2) ** (4 - p):
                return BigFloat(lo, p)
        p *= 2
    raise PrecisionError(
        f"value did not stabilise after {max_escalations} precision escalations"
    )


def polylog(k: int, x: Fraction, precision_bits: int) -> BigFloat:
    """Li_k(x) = sum_{l>=1} x^l / l^k for |x| < 1, by direct summation.

    The series is truncated once the geometric tail bound drops below
    2**-(precision_bits+8); the result is correct to within 2**(1-precision_bits)
    relative error.  Summation runs at two precisions and must agree.
    """
    if k < 1:
        raise ValueError("polylog depth k must be >= 1")
    if precision_bits < 1:
        raise ValueError("precision_bits must be positive")
    x = _as_fraction(x)
    if abs(x) >= 1:
        raise ValueError("polylog requires |x| < 1")
    if x == 0:
        return BigFloat(to_mpf(0, precision_bits), precision_bits)

    ax = abs(x)
    # smallest N with ax^(N+1)/(1-ax) < 2^-(precision_bits+8)
    log2_ax = math.log2(ax.numerator) - math.log2(ax.denominator)
    tail_target = -(precision_bits + 8) + math.log2(1 - float(ax))
    n_terms = max(4, int(tail_target / log2_ax) + 2)

    def run(prec):
        guard = 16 + n_terms.bit_length()
        with mp.workprec(prec + guard):
            xf = to_mpf(x, prec + guard)
            acc = mp.mpf(0)
            power = mp.mpf(1)
            for l in range(1, n_terms + 1):
                power *= xf
                acc += power / mp.mpf(l) ** k
        with mp.workprec(prec):
            return +acc

    return stable_value(run, precision_bits)
