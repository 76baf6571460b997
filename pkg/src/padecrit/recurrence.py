"""Variable-coefficient linear difference equations.

An order-m equation  a_n^(m) x_{n+m} + ... + a_n^(0) x_n = 0  is described by
a coefficient callback; solutions are iterated exactly over Fractions.  The
module provides the companion matrix, Casoratian windows and their Abel-type
first-order law (with sign (-1)^m), and the order-C(m, l) equation satisfied
by every l x l minor sequence of a solution window, built from minors of
companion-matrix products.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction

from .arith import Poly, binomial
from .linalg import IndexSet, RatMat, charpoly, compound, det, minor


class DegenerateRecurrenceError(RuntimeError):
    """A required highest/lowest coefficient vanished; carries the index."""

    def __init__(self, n: int, which: str):
        super().__init__(f"{which} coefficient is zero at n = {n}")
        self.n = n
        self.which = which


class Recurrence:
    """Order-m recurrence with memoized coefficient access.

    ``coeff_fn(n)`` must return the m+1 coefficients (lowest first).  Both end
    coefficients are checked to be nonzero whenever a row is fetched.  For
    perturbed equations whose coefficients converge, ``limit`` carries the
    limiting coefficient row used by the asymptotic layer.
    """

    def __init__(self, order: int, coeff_fn, limit=None):
        if order < 1:
            raise ValueError("order must be >= 1")
        self.order = order
        self._fn = coeff_fn
        self._cache = {}
        self.limit = None if limit is None else tuple(Fraction(c) for c in limit)

    @classmethod
    def constant(cls, coeffs) -> "Recurrence":
        row = tuple(Fraction(c) for c in coeffs)
        return cls(len(row) - 1, lambda n: row, limit=row)

    @classmethod
    def from_table(cls, order: int, table: dict) -> "Recurrence":
        def fn(n):
            if n not in table:
                raise KeyError(f"no coefficients tabulated for n = {n}")
            return table[n]

        return cls(order, fn)

    def coeffs(self, n: int) -> tuple:
        if n not in self._cache:
            row = tuple(Fraction(c) for c in self._fn(n))
            if len(row) != self.order + 1:
                raise ValueError(f"coefficient row at n = {n} has wrong length")
            self._cache[n] = row
        row = self._cache[n]
        if row[0] == 0:
            raise DegenerateRecurrenceError(n, "lowest")
        if row[-1] == 0:
            raise DegenerateRecurrenceError(n, "highest")
        return row

    def limit_coeffs(self) -> tuple:
        if self.limit is None:
            raise ValueError("recurrence has no declared limit coefficients")
        return self.limit


def recurrence_from_json(doc: dict) -> Recurrence:
    """Load a table-backed recurrence from {order, coeffs: [{n, values}]}.

    Values are decimal integer or "num/den" strings.
    """
    order = int(doc["order"])
    table = {}
    for row in doc["coeffs"]:
        values = tuple(Fraction(str(v)) for v in row["values"])
        table[int(row["n"])] = values
    return Recurrence.from_table(order, table)


def companion(rec: Recurrence, n: int) -> RatMat:
    """Companion matrix: superdiagonal ones, last row -a^(j-1)/a^(m)."""
    m = rec.order
    row = rec.coeffs(n)
    data = [[Fraction(0)] * m for _ in range(m)]
    for i in range(m - 1):
        data[i][i + 1] = Fraction(1)
    for j in range(m):
        data[m - 1][j] = -row[j] / row[m]
    return RatMat(data)


def companion_inverse(rec: Recurrence, n: int) -> RatMat:
    """Closed form of the inverse: first row -a^(j)/a^(0), subdiagonal ones."""
    m = rec.order
    row = rec.coeffs(n)
    data = [[Fraction(0)] * m for _ in range(m)]
    for j in range(m):
        data[0][j] = -row[j + 1] / row[0]
    for i in range(m - 1):
        data[i + 1][i] = Fraction(1)
    return RatMat(data)


class SolutionBundle:
    """l tracked solutions of a recurrence, cached exactly.

    Reads of already computed prefixes are safe from any thread; cache
    extension is serialized by a lock.
    """

    def __init__(self, rec: Recurrence, initial_columns):
        self.rec = rec
        cols = [[Fraction(x) for x in col] for col in initial_columns]
        if any(len(c) != rec.order for c in cols):
            raise ValueError(f"each solution needs {rec.order} initial values")
        if not cols:
            raise ValueError("need at least one solution")
        self.l = len(cols)
        self._values = cols
        self._lock = threading.Lock()

    def ensure(self, up_to: int):
        """Extend the cache so x_n is available for all n <= up_to."""
        with self._lock:
            m = self.rec.order
            have = len(self._values[0])
            while have <= up_to:
                n = have - m
                row = self.rec.coeffs(n)
                for col in self._values:
                    acc = Fraction(0)
                    for j in range(m):
                        acc += row[j] * col[n + j]
                    col.append(-acc / row[m])
                have += 1

    def value(self, j: int, n: int) -> Fraction:
        self.ensure(n)
        return self._values[j][n]

    def column(self, j: int, up_to: int) -> list:
        self.ensure(up_to)
        return list(self._values[j][: up_to + 1])

    def residual(self, j: int, n: int) -> Fraction:
        """sum_i a_n^(i) x_{n+i}; identically zero for a true solution."""
        m = self.rec.order
        self.ensure(n + m)
        row = self.rec.coeffs(n)
        return sum(row[i] * self._values[j][n + i] for i in range(m + 1))

    def window_matrix(self, n: int, depth: int | None = None) -> RatMat:
        """The depth x l matrix [x_{n+i-1}^(j)] (depth defaults to the order)."""
        depth = self.rec.order if depth is None else depth
        self.ensure(n + depth - 1)
        return RatMat(
            [[self._values[j][n + i] for j in range(self.l)] for i in range(depth)]
        )

    def minor(self, n: int, mu: IndexSet, ups: IndexSet) -> Fraction:
        """det of rows mu (window offsets) and columns ups (solutions)."""
        return minor(self.window_matrix(n), mu, ups)


def casoratian(bundle: SolutionBundle, n: int) -> RatMat:
    """Square window matrix of a full bundle (l = order)."""
    if bundle.l != bundle.rec.order:
        raise ValueError("Casoratian needs as many solutions as the order")
    return bundle.window_matrix(n)


def abel_check(bundle: SolutionBundle, n: int) -> bool:
    """det x_{n+1} == (-1)^m (a_n^(0)/a_n^(m)) det x_n, exactly.

    Cofactor expansion of the companion matrix gives the (-1)^m sign; see the
    brute-force determinant check in the test suite.
    """
    m = bundle.rec.order
    row = bundle.rec.coeffs(n)
    lhs = det(casoratian(bundle, n + 1))
    rhs = (-1) ** m * (row[0] / row[m]) * det(casoratian(bundle, n))
    return lhs == rhs


def confluent_casoratian_check(roots, n_upto: int = 5) -> bool:
    """Casoratian of the standard basis for repeated rational roots.

    ``roots`` is a list of (value, multiplicity).  The basis solutions are
    C(n, k-1) * lam^(n-k+1) for k = 1..multiplicity; the determinant over m
    consecutive indices must equal

        (prod_i lam_i^mult_i)^n * prod_{i<j} (lam_j - lam_i)^(mult_i mult_j)

    for every n in 0..n_upto.
    """
    roots = [(Fraction(lam), int(mult)) for lam, mult in roots]
    if any(lam == 0 for lam, _ in roots) or any(mult < 1 for _, mult in roots):
        raise ValueError("roots must be nonzero with positive multiplicity")
    m = sum(mult for _, mult in roots)

    def basis_value(lam, k, n):
        if n < k - 1:
            return Fraction(0)
        return binomial(n, k - 1) * lam ** (n - k + 1)

    columns = [(lam, k) for lam, mult in roots for k in range(1, mult + 1)]
    ratio = Fraction(1)
    for lam, mult in roots:
        ratio *= lam**mult
    const = Fraction(1)
    for a in range(len(roots)):
        for b in range(a + 1, len(roots)):
            const *= (roots[b][0] - roots[a][0]) ** (roots[a][1] * roots[b][1])

    for n in range(n_upto + 1):
        mat = RatMat(
            [[basis_value(lam, k, n + i) for lam, k in columns] for i in range(m)]
        )
        if det(mat) != ratio**n * const:
            return False
    return True


def _companion_products(rec: Recurrence, n: int, count: int) -> list:
    """[I, Psi_n, Psi_{n+1} Psi_n, ...] with ``count`` factors in the last."""
    out = [RatMat.identity(rec.order)]
    for j in range(count):
        out.append(companion(rec, n + j) * out[-1])
    return out


@dataclass(frozen=True)
class MinorRecurrence:
    """The order-C(m, l) equation annihilating every l x l minor sequence.

    The coefficients c_k(n) (k = 0..order) enter with alternating sign:
    sum_k (-1)^k c_k(n) y_{n+k} = 0 for y_n = det of any l-column minor with
    the fixed row choice mu.  They do not depend on the column choice.
    """

    base: Recurrence
    mu: IndexSet
    l: int

    @property
    def order(self) -> int:
        return binomial(self.base.order, self.l)

    def coefficients(self, n: int) -> tuple:
        """c_0(n)..c_Q(n); c_k omits product length k from the j-range."""
        m = self.base.order
        q = self.order
        if len(self.mu) != self.l or self.mu.ambient != m:
            raise ValueError("row choice must pick l rows of the window")
        products = _companion_products(self.base, n, q)
        subsets = IndexSet.all_subsets(m, self.l)
        rows = [
            [minor(products[j], self.mu, nu) for nu in subsets] for j in range(q + 1)
        ]
        coeffs = []
        for k in range(q + 1):
            picked = [rows[j] for j in range(q + 1) if j != k]
            coeffs.append(det(RatMat(picked)))
        return tuple(coeffs)

    def residual(self, bundle: SolutionBundle, ups: IndexSet, n: int) -> Fraction:
        """Plug det x_{n+k}^(mu, ups) into the equation; zero when annihilated."""
        coeffs = self.coefficients(n)
        acc = Fraction(0)
        for k, c in enumerate(coeffs):
            y = bundle.minor(n + k, self.mu, ups)
            acc += (-1) ** k * c * y
        return acc

    def leading_zero_indices(self, n_range) -> list:
        """Indices n where the highest coefficient vanishes (degenerate)."""
        return [n for n in n_range if self.coefficients(n)[-1] == 0]


def minor_recurrence(rec: Recurrence, mu: IndexSet, l: int) -> MinorRecurrence:
    if not (1 <= l <= rec.order):
        raise ValueError("need 1 <= l <= order")
    return MinorRecurrence(base=rec, mu=mu, l=l)


def minor_basis_check(rec: Recurrence, bundle: SolutionBundle, mu: IndexSet,
                      l: int, n: int) -> bool:
    """Casoratian of the minor solutions against the compound-power identity.

    For a full bundle, det over j, upsilon of det x_{n+j-1}^(mu, upsilon)
    equals det over j, nu of the product minors times (det x_n)^C(m-1, l-1).
    """
    m = rec.order
    if bundle.l != m:
        raise ValueError("needs a full bundle (one solution per order)")
    q = binomial(m, l)
    subsets = IndexSet.all_subsets(m, l)
    lhs = det(
        RatMat(
            [[bundle.minor(n + j, mu, ups) for ups in subsets] for j in range(q)]
        )
    )
    products = _companion_products(rec, n, q - 1)
    rhs_first = det(
        RatMat([[minor(products[j], mu, nu) for nu in subsets] for j in range(q)])
    )
    rhs = rhs_first * det(casoratian(bundle, n)) ** binomial(m - 1, l - 1)
    return lhs == rhs


def compound_transfer_check(rec: Recurrence, bundle: SolutionBundle, l: int,
                            n: int) -> bool:
    """[det x_{n+1}^(mu,-)]_mu == compound(Psi_n, l) . [det x_n^(mu,-)]_mu."""
    m = rec.order
    if bundle.l != l:
        raise ValueError("bundle width must equal the minor size")
    subsets = IndexSet.all_subsets(m, l)
    full_cols = IndexSet.full(l)
    vec_n = RatMat([[bundle.minor(n, mu, full_cols)] for mu in subsets])
    vec_n1 = RatMat([[bundle.minor(n + 1, mu, full_cols)] for mu in subsets])
    return vec_n1 == compound(companion(rec, n), l) * vec_n


def constant_minor_spectrum(psi: RatMat, l: int) -> Poly:
    """Characteristic polynomial of the l-th compound of a fixed companion."""
    return charpoly(compound(psi, l))
