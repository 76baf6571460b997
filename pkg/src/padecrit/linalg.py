"""Exact rational matrix algebra: determinants via fraction-free elimination,
minors, rank, compound matrices, characteristic polynomials, and the
determinant identities (Binet-Cauchy, Sylvester-Franke, Gram) that the
independence diagnostics rest on.

Multi-indices are 1-based, strictly increasing, and always enumerated in
lexicographic order; fixing one ordering everywhere avoids sign drift between
the compound-matrix constructions.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .arith import Poly, binomial


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing 1-based indices inside an ambient range."""

    indices: tuple
    ambient: int

    def __post_init__(self):
        idx = tuple(self.indices)
        object.__setattr__(self, "indices", idx)
        if any(i < 1 or i > self.ambient for i in idx):
            raise ValueError(f"indices {idx} out of range 1..{self.ambient}")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValueError(f"indices {idx} not strictly increasing")

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def zero_based(self):
        return tuple(i - 1 for i in self.indices)

    @staticmethod
    def full(ambient: int) -> "IndexSet":
        return IndexSet(tuple(range(1, ambient + 1)), ambient)

    @staticmethod
    def all_subsets(ambient: int, size: int):
        """All size-subsets of 1..ambient, lexicographic."""
        return [IndexSet(c, ambient) for c in combinations(range(1, ambient + 1), size)]


class RatMat:
    """Rectangular matrix of Fractions, row-major, immutable by convention."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data):
        rows = [[Fraction(x) for x in row] for row in data]
        if not rows or not rows[0]:
            raise ValueError("matrix must have at least one row and column")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged rows")
        self.rows = len(rows)
        self.cols = width
        self.data = rows

    @classmethod
    def identity(cls, n: int) -> "RatMat":
        return cls([[Fraction(int(i == j)) for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, r: int, c: int) -> "RatMat":
        return cls([[Fraction(0)] * c for _ in range(r)])

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def __eq__(self, other):
        if not isinstance(other, RatMat):
            return NotImplemented
        return self.data == other.data

    def __mul__(self, other: "RatMat") -> "RatMat":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in matrix product")
        out = [[Fraction(0)] * other.cols for _ in range(self.rows)]
        for i in range(self.rows):
            row = self.data[i]
            for k in range(self.cols):
                a = row[k]
                if a == 0:
                    continue
                brow = other.data[k]
                orow = out[i]
                for j in range(other.cols):
                    orow[j] += a * brow[j]
        return RatMat(out)

    def __add__(self, other: "RatMat") -> "RatMat":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("dimension mismatch in matrix sum")
        return RatMat(
            [
                [self.data[i][j] + other.data[i][j] for j in range(self.cols)]
                for i in range(self.rows)
            ]
        )

    def __sub__(self, other: "RatMat") -> "RatMat":
        return self + other.scale(-1)

    def scale(self, c) -> "RatMat":
        c = Fraction(c)
        return RatMat([[c * x for x in row] for row in self.data])

    def transpose(self) -> "RatMat":
        return RatMat([[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def submatrix(self, row_idx, col_idx) -> "RatMat":
        """Select rows and columns by 0-based index iterables."""
        return RatMat([[self.data[i][j] for j in col_idx] for i in row_idx])

    def is_square(self) -> bool:
        return self.rows == self.cols

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in row) for row in self.data)
        return f"RatMat[{body}]"


def _int_rows(mat: RatMat):
    """Clear denominators row by row; returns (int rows, total scale factor)."""
    scale = Fraction(1)
    rows = []
    for row in mat.data:
        den = 1
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
        scale *= den
        rows.append([int(x * den) for x in row])
    return rows, scale


def det(mat: RatMat) -> Fraction:
    """Exact determinant by fraction-free (Bareiss) elimination.

    Denominators are cleared row-wise first so the elimination runs over
    integers with exact divisions; pivoting picks the first nonzero entry.
    """
    if not mat.is_square():
        raise ValueError("determinant requires a square matrix")
    n = mat.rows
    a, scale = _int_rows(mat)
    sign = 1
    prev = 1
    for k in range(n - 1):
        pivot_row = None
        for r in range(k, n):
            if a[r][k] != 0:
                pivot_row = r
                break
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != k:
            a[k], a[pivot_row] = a[pivot_row], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    return Fraction(sign * a[n - 1][n - 1]) / scale


def det_cofactor(mat: RatMat) -> Fraction:
    """Cofactor-expansion determinant; the slow oracle for small matrices."""
    if not mat.is_square():
        raise ValueError("determinant requires a square matrix")
    n = mat.rows

    def rec(rows, cols):
        if len(rows) == 1:
            return mat.data[rows[0]][cols[0]]
        total = Fraction(0)
        r = rows[0]
        rest = rows[1:]
        for pos, c in enumerate(cols):
            x = mat.data[r][c]
            if x == 0:
                continue
            sub = cols[:pos] + cols[pos + 1 :]
            total += (-1) ** pos * x * rec(rest, sub)
        return total

    return rec(tuple(range(n)), tuple(range(n)))


def rank(mat: RatMat) -> int:
    """Exact rank via fraction-free row echelon reduction."""
    a, _ = _int_rows(mat)
    n_rows, n_cols = mat.rows, mat.cols
    prev = 1
    piv_r = 0
    for piv_c in range(n_cols):
        pivot_row = None
        for r in range(piv_r, n_rows):
            if a[r][piv_c] != 0:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        if pivot_row != piv_r:
            a[piv_r], a[pivot_row] = a[pivot_row], a[piv_r]
        p = a[piv_r][piv_c]
        for i in range(piv_r + 1, n_rows):
            x = a[i][piv_c]
            for j in range(piv_c, n_cols):
                a[i][j] = (a[i][j] * p - x * a[piv_r][j]) // prev
        prev = p
        piv_r += 1
        if piv_r == n_rows:
            break
    return piv_r


def mat_inverse(mat: RatMat) -> RatMat:
    """Exact inverse by Gauss-Jordan elimination over Fractions."""
    if not mat.is_square():
        raise ValueError("inverse requires a square matrix")
    n = mat.rows
    a = [list(row) for row in mat.data]
    inv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot_row = None
        for r in range(col, n):
            if a[r][col] != 0:
                pivot_row = r
                break
        if pivot_row is None:
            raise ValueError("matrix is singular")
        if pivot_row != col:
            a[col], a[pivot_row] = a[pivot_row], a[col]
            inv[col], inv[pivot_row] = inv[pivot_row], inv[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        inv[col] = [x / p for x in inv[col]]
        for r in range(n):
            if r == col or a[r][col] == 0:
                continue
            f = a[r][col]
            a[r] = [x - f * y for x, y in zip(a[r], a[col])]
            inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    return RatMat(inv)


def minor(mat: RatMat, rows: IndexSet, cols: IndexSet) -> Fraction:
    """Determinant of the sub-matrix picked by the two index sets."""
    if len(rows) != len(cols):
        raise ValueError("minor needs equally many rows and columns")
    if rows.ambient != mat.rows or cols.ambient != mat.cols:
        raise ValueError("index set ambient does not match matrix shape")
    return det(mat.submatrix(rows.zero_based(), cols.zero_based()))


def compound(mat: RatMat, l: int) -> RatMat:
    """l-th compound matrix: all l x l minors, lexicographic on both axes."""
    if not mat.is_square():
        raise ValueError("compound requires a square matrix")
    m = mat.rows
    if l < 1 or l > m:
        raise ValueError(f"compound order {l} out of range 1..{m}")
    subsets = IndexSet.all_subsets(m, l)
    return RatMat(
        [[minor(mat, mu, nu) for nu in subsets] for mu in subsets]
    )


def charpoly(mat: RatMat) -> Poly:
    """Monic characteristic polynomial det(lambda*I - M), exact.

    Faddeev-LeVerrier recursion: only matrix products and traces, all over
    Fractions.
    """
    if not mat.is_square():
        raise ValueError("charpoly requires a square matrix")
    n = mat.rows
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    work = RatMat.identity(n)
    for k in range(1, n + 1):
        work = mat * work
        trace = sum(work.data[i][i] for i in range(n))
        c = -trace / k
        coeffs[n - k] = c
        if k < n:
            work = work + RatMat.identity(n).scale(c)
    return Poly(coeffs)


def sylvester_franke_check(mat: RatMat, l: int) -> bool:
    """det(compound(M, l)) == det(M) ** C(m-1, l-1), exactly."""
    d = det(mat)
    return det(compound(mat, l)) == d ** binomial(mat.rows - 1, l - 1)


def compound_charpoly_check(mat: RatMat, eigenvalues, l: int) -> bool:
    """Characteristic polynomial of the l-th compound equals the product of
    (lambda - product of l eigenvalues) over all l-subsets, coefficientwise.

    Callers supply a rationally known spectrum (triangular or diagonal test
    matrices), repeated with algebraic multiplicity.
    """
    eig = [Fraction(e) for e in eigenvalues]
    if len(eig) != mat.rows:
        raise ValueError("need exactly one eigenvalue per row")
    expected = Poly.one()
    for combo in combinations(range(len(eig)), l):
        prod = Fraction(1)
        for i in combo:
            prod *= eig[i]
        expected = expected * Poly((-prod, 1))
    return charpoly(compound(mat, l)) == expected


def binet_cauchy_check(a: RatMat, b: RatMat) -> bool:
    """det(A B) == sum over l-subsets mu of det A[:, mu] * det B[mu, :]."""
    l, m = a.rows, a.cols
    if b.rows != m or b.cols != l or l > m:
        raise ValueError("need A of shape l x m and B of shape m x l with l <= m")
    lhs = det(a * b)
    full = IndexSet.full(l)
    rhs = Fraction(0)
    for mu in IndexSet.all_subsets(m, l):
        rhs += det(a.submatrix(full.zero_based(), mu.zero_based())) * det(
            b.submatrix(mu.zero_based(), full.zero_based())
        )
    return lhs == rhs


def gram_identity_check(mat: RatMat) -> bool:
    """det(M^t M) == sum over row subsets mu of det(M[mu, :])^2.

    The left side is the squared l-dimensional volume of the parallelotope
    spanned by the columns of an m x l matrix.
    """
    m, l = mat.rows, mat.cols
    if l > m:
        raise ValueError("need at least as many rows as columns")
    lhs = det(mat.transpose() * mat)
    full = IndexSet.full(l)
    rhs = Fraction(0)
    for mu in IndexSet.all_subsets(m, l):
        rhs += det(mat.submatrix(mu.zero_based(), full.zero_based())) ** 2
    return lhs == rhs


# --- JSON / CSV import-export (integers as decimal strings) ---------------


def _frac_to_pair(x: Fraction):
    return [str(x.numerator), str(x.denominator)]


def _pair_to_frac(pair) -> Fraction:
    num, den = pair
    return Fraction(int(num), int(den))


def mat_to_json(mat: RatMat) -> dict:
    return {
        "rows": mat.rows,
        "cols": mat.cols,
        "entries": [_frac_to_pair(x) for row in mat.data for x in row],
    }


def mat_from_json(doc: dict) -> RatMat:
    r, c = int(doc["rows"]), int(doc["cols"])
    entries = [_pair_to_frac(p) for p in doc["entries"]]
    if len(entries) != r * c:
        raise ValueError("entry count does not match rows*cols")
    return RatMat([entries[i * c : (i + 1) * c] for i in range(r)])


def mat_to_csv(mat: RatMat) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    for row in mat.data:
        writer.writerow([f"{x.numerator}/{x.denominator}" for x in row])
    return buf.getvalue()


def mat_from_csv(text: str) -> RatMat:
    rows = []
    for record in csv.reader(io.StringIO(text)):
        if not record:
            continue
        rows.append([Fraction(cell.strip()) for cell in record])
    return RatMat(rows)
