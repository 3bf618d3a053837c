"""Vertices of the Bruhat-Tits building of PGL(n) over Q_p.

Vertices are homothety classes of Z_(p)-lattices. A class is stored through a
canonical basis: the column Hermite form of its representative that lies in
Z_(p)^n but not in p Z_(p)^n. Class equality is then matrix equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from . import kernels
from .exact import (
    RationalMatrix,
    ValuationContext,
    column_space_basis,
    determinant,
    independent_columns,
    intersect_spaces,
    inverse,
    min_valuation,
    rank,
    smith_local,
    valuation,
)


class RankDeficient(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class NotComplementary(ValueError):
    pass


@dataclass(frozen=True)
class Subspace:
    basis: RationalMatrix

    def __post_init__(self):
        if rank(self.basis) != self.basis.ncols:
            raise RankDeficient("subspace basis has dependent columns")

    @classmethod
    def span(cls, M: RationalMatrix) -> "Subspace":
        """Subspace spanned by the columns of M (dependent columns dropped)."""
        return cls(column_space_basis(M))

    @classmethod
    def from_vectors(cls, *vectors) -> "Subspace":
        n = len(vectors[0])
        return cls.span(RationalMatrix.from_columns(vectors, n))

    @property
    def ambient_dim(self) -> int:
        return self.basis.nrows

    @property
    def dim(self) -> int:
        return self.basis.ncols

    def contains(self, v) -> bool:
        col = RationalMatrix.from_columns([v], self.ambient_dim)
        return rank(self.basis.hstack(col)) == self.dim

    def same_as(self, other: "Subspace") -> bool:
        return self.dim == other.dim and rank(self.basis.hstack(other.basis)) == self.dim

    def intersect(self, other: "Subspace") -> "Subspace":
        return Subspace(intersect_spaces(self.basis, other.basis))

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace.span(self.basis.hstack(other.basis))


@dataclass(frozen=True)
class Lattice:
    basis: RationalMatrix
    ctx: ValuationContext

    def __post_init__(self):
        if self.basis.ncols == 0 or rank(self.basis) != self.basis.ncols:
            raise RankDeficient("lattice basis must have independent columns")

    @property
    def ambient_dim(self) -> int:
        return self.basis.nrows

    @property
    def rank(self) -> int:
        return self.basis.ncols

    @classmethod
    def trusted(cls, basis: RationalMatrix, ctx: ValuationContext) -> "Lattice":
        """Construct without the independence check (caller guarantees it)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "basis", basis)
        object.__setattr__(obj, "ctx", ctx)
        return obj

    def scaled(self, k: int) -> "Lattice":
        return Lattice(self.basis.scale(Fraction(self.ctx.prime) ** k), self.ctx)

    def span(self) -> Subspace:
        return Subspace(self.basis)


def standard_lattice(n: int, ctx: ValuationContext) -> Lattice:
    return Lattice(RationalMatrix.identity(n), ctx)


def diagonal_lattice(exponents: Iterable[int], ctx: ValuationContext) -> Lattice:
    p = Fraction(ctx.prime)
    return Lattice(RationalMatrix.diag([p**a for a in exponents]), ctx)


# --- Hermite forms -----------------------------------------------------------


def residue_mod(x: Fraction, a: int, ctx: ValuationContext) -> Fraction:
    """Representative of x modulo p^a Z_(p): p-power denominator, in [0, p^a)."""
    p = ctx.prime
    if x == 0:
        return Fraction(0)
    v = valuation(x, ctx)
    if v >= a:
        return Fraction(0)
    t = max(0, -v)
    y = x * Fraction(p) ** t
    Q = p ** (a + t)
    r = (y.numerator * pow(y.denominator, -1, Q)) % Q
    return Fraction(r, p**t)


def hermite_generic(M: RationalMatrix, ctx: ValuationContext) -> RationalMatrix:
    """Column Hermite form over Z_(p) of the module spanned by M's columns.

    Works for any rank; output columns are ordered by pivot row, pivots are
    exact powers of p, entries in a pivot row left of the pivot are reduced
    by :func:`residue_mod`.
    """
    n = M.nrows
    p = Fraction(ctx.prime)
    work = [list(c) for c in M.columns()]
    out: list[tuple[int, list[Fraction], int]] = []
    for i in range(n):
        best = None
        for j, c in enumerate(work):
            if c[i] != 0:
                v = valuation(c[i], ctx)
                if best is None or v < best[0]:
                    best = (v, j)
        if best is None:
            continue
        a, j = best
        piv = work.pop(j)
        u = piv[i] / p**a
        piv = [x / u for x in piv]
        for c in work:
            if c[i] != 0:
                f = c[i] / piv[i]
                for k in range(i, n):
                    c[k] -= f * piv[k]
        out.append((i, piv, a))
    for idx, (i, col_i, a) in enumerate(out):
        pa = p**a
        for j in range(idx):
            col_j = out[j][1]
            x = col_j[i]
            r = residue_mod(x, a, ctx)
            if r != x:
                f = (x - r) / pa
                for k in range(i, n):
                    col_j[k] -= f * col_i[k]
    return RationalMatrix.from_columns([c for _, c, _ in out], n)


def _to_residue(x: Fraction, P: int) -> int:
    return (x.numerator * pow(x.denominator, -1, P)) % P


def _full_rank_exponent(M: RationalMatrix, ctx: ValuationContext) -> int:
    """Some K with p^K Z_(p)^n inside the (integral, full-rank) span of M."""
    idx = independent_columns(M)
    if len(idx) < M.nrows:
        raise RankDeficient("generating set does not have full rank")
    return valuation(determinant(M.select_columns(idx)), ctx)


def _int_columns(M: RationalMatrix) -> list[list[int]]:
    """Columns scaled by their common denominator (a unit when M is integral)."""
    out = []
    for c in M.columns():
        d = math.lcm(*(x.denominator for x in c))
        out.append([int(x * d) for x in c])
    return out


def _bareiss_det(cols: list[list[int]]) -> int:
    n = len(cols)
    a = [list(r) for r in zip(*cols)]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def hermite_integral(M: RationalMatrix, ctx: ValuationContext) -> RationalMatrix:
    """Hermite form of a full-rank module spanned by integral columns (kernel path)."""
    n = M.nrows
    p = ctx.prime
    icols = _int_columns(M)
    if len(icols) == n:
        d = _bareiss_det(icols)
        if d == 0:
            raise RankDeficient("generating set does not have full rank")
        e = valuation(Fraction(d), ctx) + 1
    else:
        e = _full_rank_exponent(M, ctx) + 1
    P = p**e
    cols = [[x % P for x in c] for c in icols]
    rows, _ = kernels.hnf_mod(cols, n, p, e)
    return RationalMatrix(rows)


def hermite_form(M: RationalMatrix, ctx: ValuationContext) -> RationalMatrix:
    """Hermite form of the module spanned by M's columns (exact submodule, not class)."""
    if rank(M) < M.nrows:
        return hermite_generic(M, ctx)
    s = -min_valuation(M, ctx)
    scale = Fraction(ctx.prime) ** s
    H = hermite_integral(M.scale(scale), ctx)
    return H.scale(1 / scale)


def _class_normal(M: RationalMatrix, ctx: ValuationContext) -> RationalMatrix:
    s = -min_valuation(M, ctx)
    N = M.scale(Fraction(ctx.prime) ** s)
    if N.ncols == N.nrows:
        return hermite_integral(N, ctx)
    return hermite_generic(N, ctx)


@dataclass(frozen=True)
class LatticeClass:
    canonical: Lattice

    @property
    def ctx(self) -> ValuationContext:
        return self.canonical.ctx

    @property
    def basis(self) -> RationalMatrix:
        return self.canonical.basis

    @property
    def ambient_dim(self) -> int:
        return self.canonical.ambient_dim

    @property
    def rank(self) -> int:
        return self.canonical.rank

    def to_strings(self) -> list[list[str]]:
        return self.basis.to_strings()


def lattice_class(L: Lattice) -> LatticeClass:
    """Canonical vertex {L}; invariant under L -> p^k L and basis changes."""
    return LatticeClass(Lattice.trusted(_class_normal(L.basis, L.ctx), L.ctx))


def class_of(M: RationalMatrix, ctx: ValuationContext) -> LatticeClass:
    return lattice_class(Lattice(M, ctx))


def _class_of_basis(M: RationalMatrix, ctx: ValuationContext) -> LatticeClass:
    return lattice_class(Lattice.trusted(M, ctx))


# --- distance ------------------------------------------------------------------


def _check_pair(x: LatticeClass, y: LatticeClass) -> None:
    n = x.ambient_dim
    if y.ambient_dim != n or x.rank != n or y.rank != n:
        raise DimensionMismatch("both classes must be full rank in the same space")
    if x.ctx != y.ctx:
        raise DimensionMismatch("classes live over different primes")


def inclusion_bounds(x: LatticeClass, y: LatticeClass) -> tuple[int, int]:
    """(r, s) for the canonical representatives M of x and L of y.

    s = min{k : p^k L in M}, r = max{k : M in p^k L}.
    """
    _check_pair(x, y)
    M, L = x.basis, y.basis
    s = -min_valuation(inverse(M) @ L, x.ctx)
    r = min_valuation(inverse(L) @ M, x.ctx)
    return r, s


def combinatorial_distance(x: LatticeClass, y: LatticeClass) -> int:
    r, s = inclusion_bounds(x, y)
    return s - r


def adjacent(x: LatticeClass, y: LatticeClass) -> bool:
    _check_pair(x, y)
    if x == y:
        return False
    return combinatorial_distance(x, y) == 1


# --- half-geodesics towards boundary vertices ------------------------------------


def split_basis(M: Lattice, W: Subspace) -> RationalMatrix:
    """R-basis of M whose first dim W vectors are an R-basis of M ∩ W."""
    n = M.ambient_dim
    if M.rank != n:
        raise RankDeficient("split_basis needs a full-rank lattice")
    if W.ambient_dim != n:
        raise DimensionMismatch("subspace and lattice live in different spaces")
    coords = inverse(M.basis) @ W.basis
    S = smith_local(coords, M.ctx)
    return M.basis @ S.left


def intersection_lattice(M: Lattice, W: Subspace) -> Lattice:
    """M ∩ W as a lattice of rank dim W."""
    B = split_basis(M, W)
    return Lattice(B.select_columns(range(W.dim)), M.ctx)


def _scaled_tail(B: RationalMatrix, d: int, k: int, p: int) -> RationalMatrix:
    f = Fraction(p) ** k
    return RationalMatrix(
        [[x if j < d else x * f for j, x in enumerate(row)] for row in B.tolist()],
        ncols=B.ncols,
    )


def half_geodesic_vertex(x: LatticeClass, W: Subspace, k: int) -> LatticeClass:
    """The (k+1)-st vertex on the half-geodesic from x towards y_W."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if not 0 < W.dim < x.ambient_dim:
        raise ValueError("boundary vertices need 0 < dim W < n")
    if k == 0:
        return x
    B = split_basis(x.canonical, W)
    return _class_of_basis(_scaled_tail(B, W.dim, k, x.ctx.prime), x.ctx)


def half_geodesic(x: LatticeClass, W: Subspace, k_max: int) -> list[LatticeClass]:
    B = split_basis(x.canonical, W)
    out = [x]
    for k in range(1, k_max + 1):
        out.append(_class_of_basis(_scaled_tail(B, W.dim, k, x.ctx.prime), x.ctx))
    return out


def reduction_segment_equal(x: LatticeClass, W1: Subspace, W2: Subspace, m: int) -> bool:
    """(W1 ∩ M) + p^m M == (W2 ∩ M) + p^m M for the canonical representative M of x."""
    if m < 1:
        raise ValueError("m must be positive")
    M = x.canonical
    n = M.ambient_dim
    p = M.ctx.prime
    Minv = inverse(M.basis)
    P = p ** (m + 1)
    forms = []
    for W in (W1, W2):
        if not 0 < W.dim < n:
            raise ValueError("boundary vertices need 0 < dim W < n")
        S = smith_local(Minv @ W.basis, M.ctx)
        cols = [[_to_residue(S.left[i, j], P) for i in range(n)] for j in range(W.dim)]
        cols += [[p**m if i == j else 0 for i in range(n)] for j in range(n)]
        forms.append(kernels.hnf_mod(cols, n, p, m + 1))
    return forms[0] == forms[1]


# --- combinatorial geodesics between complementary subspaces ---------------------


@dataclass(eq=False)
class CombinatorialGeodesic:
    """Vertices {M_w + p^k M_w2}, k in Z.

    Orientation runs from the W end to the W2 end, i.e. along decreasing k.
    """

    W: Subspace
    W2: Subspace
    M_w: Lattice
    M_w2: Lattice
    _cache: dict = field(default_factory=dict, repr=False)
    _index: dict = field(default_factory=dict, repr=False)

    @property
    def ctx(self) -> ValuationContext:
        return self.M_w.ctx

    @property
    def class_w(self) -> LatticeClass:
        return lattice_class(self.M_w)

    @property
    def class_w2(self) -> LatticeClass:
        return lattice_class(self.M_w2)

    def vertex(self, k: int) -> LatticeClass:
        v = self._cache.get(k)
        if v is None:
            tail = self.M_w2.basis.scale(Fraction(self.ctx.prime) ** k)
            v = _class_of_basis(self.M_w.basis.hstack(tail), self.ctx)
            self._cache[k] = v
            self._index[v] = k
        return v

    def vertices(self, k_min: int, k_max: int) -> list[LatticeClass]:
        return [self.vertex(k) for k in range(k_min, k_max + 1)]


def geodesic_between(W: Subspace, W2: Subspace, M_w: Lattice, M_w2: Lattice) -> CombinatorialGeodesic:
    n = W.ambient_dim
    if rank(W.basis.hstack(W2.basis)) < n or W.dim + W2.dim != n:
        raise NotComplementary("W and W2 do not span the ambient space as a direct sum")
    if M_w.rank != W.dim or not Subspace(M_w.basis).same_as(W):
        raise ValueError("M_w must be a full-rank lattice in W")
    if M_w2.rank != W2.dim or not Subspace(M_w2.basis).same_as(W2):
        raise ValueError("M_w2 must be a full-rank lattice in W2")
    return CombinatorialGeodesic(W, W2, M_w, M_w2)


def on_geodesic(g: CombinatorialGeodesic, x: LatticeClass, window: tuple[int, int]) -> int | None:
    k_min, k_max = window
    if k_min > k_max:
        raise ValueError("empty window")
    for k in range(k_min, k_max + 1):
        g.vertex(k)
    k = g._index.get(x)
    if k is not None and k_min <= k <= k_max:
        return k
    return None
