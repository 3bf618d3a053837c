"""Exact rational linear algebra over Q with a p-adic valuation.

Everything here works on :class:`fractions.Fraction` entries. The local ring
is Z localized at p, so "unit" means a rational whose numerator and
denominator are both prime to p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

INF = math.inf


class NotSquare(ValueError):
    pass


class DependentColumns(ValueError):
    pass


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class ValuationContext:
    prime: int

    def __post_init__(self):
        if not isinstance(self.prime, int) or not _is_prime(self.prime):
            raise ValueError(f"{self.prime!r} is not a prime")


def _int_valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def valuation(x, ctx: ValuationContext):
    """p-adic valuation of a rational; ``math.inf`` for zero."""
    x = Fraction(x)
    if x == 0:
        return INF
    p = ctx.prime
    return _int_valuation(x.numerator, p) - _int_valuation(x.denominator, p)


def unit_part(x: Fraction, ctx: ValuationContext) -> Fraction:
    """x / p^v(x)."""
    v = valuation(x, ctx)
    return x / Fraction(ctx.prime) ** v


def parse_rational(s) -> Fraction:
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        return Fraction(s.strip())
    raise TypeError(f"cannot read a rational from {s!r}")


def format_rational(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class RationalMatrix:
    """Immutable dense matrix of Fractions.

    Zero-column matrices are allowed (they show up as empty kernels).
    """

    __slots__ = ("_rows", "nrows", "ncols", "_hash")

    def __init__(self, rows: Iterable[Iterable], ncols: int | None = None):
        data = tuple(tuple(parse_rational(x) for x in row) for row in rows)
        nrows = len(data)
        if ncols is None:
            if nrows == 0:
                raise ValueError("need ncols for an empty matrix")
            ncols = len(data[0])
        if any(len(r) != ncols for r in data):
            raise ValueError("ragged rows")
        self._rows = data
        self.nrows = nrows
        self.ncols = ncols
        self._hash = None

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], nrows: int) -> "RationalMatrix":
        return cls(
            [[cols[j][i] for j in range(len(cols))] for i in range(nrows)],
            ncols=len(cols),
        )

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "RationalMatrix":
        return cls([[0] * ncols for _ in range(nrows)], ncols=ncols)

    @classmethod
    def diag(cls, entries: Sequence) -> "RationalMatrix":
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, ij):
        i, j = ij
        return self._rows[i][j]

    def row(self, i: int) -> tuple:
        return self._rows[i]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self._rows)

    def columns(self) -> list[tuple]:
        return [self.column(j) for j in range(self.ncols)]

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self._rows]

    @property
    def T(self) -> "RationalMatrix":
        return RationalMatrix.from_columns(self._rows, self.ncols)

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = other.columns()
        return RationalMatrix(
            [[sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in cols] for r in self._rows],
            ncols=other.ncols,
        )

    def scale(self, c) -> "RationalMatrix":
        c = Fraction(c)
        return RationalMatrix([[c * x for x in r] for r in self._rows], ncols=self.ncols)

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return RationalMatrix(
            [[a + b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)],
            ncols=self.ncols,
        )

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        return self + other.scale(-1)

    def hstack(self, *others: "RationalMatrix") -> "RationalMatrix":
        rows = [list(r) for r in self._rows]
        ncols = self.ncols
        for o in others:
            if o.nrows != self.nrows:
                raise ValueError("row count mismatch in hstack")
            for i in range(self.nrows):
                rows[i].extend(o._rows[i])
            ncols += o.ncols
        return RationalMatrix(rows, ncols=ncols)

    def select_columns(self, idx: Sequence[int]) -> "RationalMatrix":
        return RationalMatrix([[r[j] for j in idx] for r in self._rows], ncols=len(idx))

    def __eq__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nrows, self.ncols, self._rows))
        return self._hash

    def __repr__(self):
        body = "; ".join(" ".join(format_rational(x) for x in r) for r in self._rows)
        return f"RationalMatrix([{body}])"

    def to_strings(self) -> list[list[str]]:
        return [[format_rational(x) for x in r] for r in self._rows]

    @classmethod
    def from_strings(cls, rows: Sequence[Sequence]) -> "RationalMatrix":
        return cls(rows)


def _as_lists(M: RationalMatrix) -> list[list[Fraction]]:
    return [list(r) for r in M._rows]


def rref(M: RationalMatrix) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot column indices."""
    A = _as_lists(M)
    m, n = M.shape
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        piv = next((i for i in range(r, m) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return A, pivots


def rank(M: RationalMatrix) -> int:
    if M.ncols == 0:
        return 0
    return len(rref(M)[1])


def kernel_basis(M: RationalMatrix) -> RationalMatrix:
    """Columns spanning {x : Mx = 0}; may have zero columns."""
    A, pivots = rref(M)
    n = M.ncols
    free = [c for c in range(n) if c not in pivots]
    cols = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -A[r][f]
        cols.append(v)
    return RationalMatrix.from_columns(cols, n)


def annihilator_basis(W: RationalMatrix) -> RationalMatrix:
    """Rows spanning the linear forms that vanish on the column span of W."""
    if rank(W) < W.ncols:
        raise DependentColumns(f"rank {rank(W)} < {W.ncols} columns")
    K = kernel_basis(W.T)
    if K.ncols == 0:
        return RationalMatrix([], ncols=W.nrows)
    return K.T


def determinant(M: RationalMatrix) -> Fraction:
    if M.nrows != M.ncols:
        raise NotSquare(f"shape {M.shape}")
    A = _as_lists(M)
    n = M.nrows
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        inv = 1 / A[c][c]
        for i in range(c + 1, n):
            if A[i][c] != 0:
                f = A[i][c] * inv
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return det


def inverse(M: RationalMatrix) -> RationalMatrix:
    n = M.nrows
    if n != M.ncols:
        raise NotSquare(f"shape {M.shape}")
    aug = M.hstack(RationalMatrix.identity(n))
    A, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return RationalMatrix([row[n:] for row in A])


def solve(M: RationalMatrix, B: RationalMatrix) -> RationalMatrix | None:
    """X with M X = B, or None if the system is inconsistent.

    M must have independent columns; the solution is then unique.
    """
    m, n = M.shape
    A, pivots = rref(M.hstack(B))
    if any(p >= n for p in pivots):
        return None
    if len(pivots) < n:
        raise DependentColumns("solve() needs independent columns")
    return RationalMatrix([A[i][n:] for i in range(n)], ncols=B.ncols)


def independent_columns(M: RationalMatrix) -> list[int]:
    """Indices of a greedy maximal independent subset of columns."""
    return rref(M)[1]


def column_space_basis(M: RationalMatrix) -> RationalMatrix:
    return M.select_columns(independent_columns(M))


def intersect_spaces(U: RationalMatrix, W: RationalMatrix) -> RationalMatrix:
    """Basis (columns) of span(U) ∩ span(W); both inputs need independent columns."""
    K = kernel_basis(U.hstack(W.scale(-1)))
    if K.ncols == 0:
        return _empty_cols(U.nrows)
    coeffs = RationalMatrix([K.row(i) for i in range(U.ncols)], ncols=K.ncols)
    return column_space_basis(U @ coeffs)


def _empty_cols(nrows: int) -> RationalMatrix:
    return RationalMatrix([[] for _ in range(nrows)], ncols=0)


@dataclass(frozen=True)
class SmithDecomposition:
    left: RationalMatrix
    exponents: tuple[int, ...]
    right: RationalMatrix
    rank: int
    prime: int

    def diagonal(self) -> RationalMatrix:
        m, n = self.left.nrows, self.right.ncols
        p = Fraction(self.prime)
        rows = [[0] * n for _ in range(m)]
        for i, a in enumerate(self.exponents):
            rows[i][i] = p**a
        return RationalMatrix(rows, ncols=n)

    def reconstruct(self) -> RationalMatrix:
        return self.left @ self.diagonal() @ self.right


def smith_local(M: RationalMatrix, ctx: ValuationContext) -> SmithDecomposition:
    """Smith form over Z_(p): M = left * diag(p^a_1, ..., p^a_r, 0...) * right.

    Pivot = entry of minimal valuation in the remaining block, ties broken by
    lowest (row, col). left and right have unit determinant.
    """
    p = ctx.prime
    m, n = M.shape
    D = _as_lists(M)
    L = _as_lists(RationalMatrix.identity(m))
    R = _as_lists(RationalMatrix.identity(n))
    exps: list[int] = []
    P = Fraction(p)

    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = D[i][j]
                if x == 0:
                    continue
                v = valuation(x, ctx)
                if best is None or v < best[0]:
                    best = (v, i, j)
        if best is None:
            break
        a, i, j = best
        if i != t:
            D[t], D[i] = D[i], D[t]
            for row in L:
                row[t], row[i] = row[i], row[t]
        if j != t:
            for row in D:
                row[t], row[j] = row[j], row[t]
            R[t], R[j] = R[j], R[t]
        u = D[t][t] / P**a
        if u != 1:
            D[t] = [x / u for x in D[t]]
            for row in L:
                row[t] *= u
        piv = D[t][t]
        for i in range(t + 1, m):
            c = D[i][t]
            if c:
                c = c / piv
                D[i] = [x - c * y for x, y in zip(D[i], D[t])]
                for row in L:
                    row[t] += c * row[i]
        for j in range(t + 1, n):
            c = D[t][j]
            if c:
                c = c / piv
                for row in D:
                    row[j] -= c * row[t]
                R[t] = [x + c * y for x, y in zip(R[t], R[j])]
        exps.append(a)

    return SmithDecomposition(
        left=RationalMatrix(L, ncols=m),
        exponents=tuple(exps),
        right=RationalMatrix(R, ncols=n),
        rank=len(exps),
        prime=p,
    )


def integral(M: RationalMatrix, ctx: ValuationContext) -> bool:
    return all(valuation(x, ctx) >= 0 for r in M._rows for x in r)


def min_valuation(M: RationalMatrix, ctx: ValuationContext):
    return min((valuation(x, ctx) for r in M._rows for x in r), default=INF)
