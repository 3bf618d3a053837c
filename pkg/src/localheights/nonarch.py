"""Local intersection numbers of linear cycles at a finite place.

Two routes to <P(A) - P(B), P(C) - P(D)>:

* the valuation of a ratio of four determinants (:func:`intersection_algebraic`);
* oriented distance between two gate vertices on a geodesic of the
  Bruhat-Tits building (:func:`intersection_geometric`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .building import (
    CombinatorialGeodesic,
    Lattice,
    LatticeClass,
    Subspace,
    geodesic_between,
    half_geodesic_vertex,
    hermite_form,
)
from .exact import (
    RationalMatrix,
    ValuationContext,
    annihilator_basis,
    determinant,
    inverse,
    rank,
    smith_local,
    valuation,
)


class ImproperIntersection(ValueError):
    pass


class HypothesesFailed(ValueError):
    """A hypothesis of the gate formula is not met; ``condition`` names it."""

    def __init__(self, condition: str, message: str | None = None):
        super().__init__(message or condition)
        self.condition = condition


class NotSpanning(HypothesesFailed):
    def __init__(self, message: str = "C + D is not the whole space"):
        super().__init__("spanning", message)


class LatticesNotEquivalent(HypothesesFailed):
    def __init__(self, message: str = "projected lattices are not homothetic"):
        super().__init__("equivalence", message)


class GateNotFound(RuntimeError):
    pass


class NotOnGeodesic(ValueError):
    pass


@dataclass(frozen=True)
class CycleQuadruple:
    A: Subspace
    B: Subspace
    C: Subspace
    D: Subspace
    ctx: ValuationContext

    def __post_init__(self):
        n = self.A.ambient_dim
        if any(W.ambient_dim != n for W in (self.B, self.C, self.D)):
            raise ValueError("subspaces live in different spaces")
        if self.A.dim != self.B.dim or self.C.dim != self.D.dim:
            raise ValueError("need dim A = dim B and dim C = dim D")
        if self.A.dim + self.C.dim != n or not 1 <= self.A.dim <= self.C.dim:
            raise ValueError("need dim A + dim C = n and 1 <= dim A <= dim C")

    @property
    def n(self) -> int:
        return self.A.ambient_dim

    @property
    def p(self) -> int:
        return self.A.dim

    @property
    def q(self) -> int:
        return self.C.dim

    def swap_ab(self) -> "CycleQuadruple":
        return CycleQuadruple(self.B, self.A, self.C, self.D, self.ctx)

    def swap_cd(self) -> "CycleQuadruple":
        return CycleQuadruple(self.A, self.B, self.D, self.C, self.ctx)

    def improper_pairs(self) -> list[str]:
        bad = []
        for x, X in (("A", self.A), ("B", self.B)):
            for y, Y in (("C", self.C), ("D", self.D)):
                if rank(X.basis.hstack(Y.basis)) < self.n:
                    bad.append(x + y)
        return bad


@dataclass(frozen=True)
class GateData:
    Cprime: Subspace
    Dprime: Subspace
    L_A: Lattice
    L_B: Lattice
    M0: Lattice | None
    alpha_val: int
    beta_val: int
    CD: Subspace | None = None


def intersection_algebraic(q: CycleQuadruple) -> int:
    """v(det f(a) det g(b) / (det f(b) det g(a))) for annihilators f of C, g of D."""
    bad = q.improper_pairs()
    if bad:
        raise ImproperIntersection("nonzero intersections: " + ", ".join(bad))
    f = annihilator_basis(q.C.basis)
    g = annihilator_basis(q.D.basis)
    a, b = q.A.basis, q.B.basis
    num = determinant(f @ a) * determinant(g @ b)
    den = determinant(f @ b) * determinant(g @ a)
    return valuation(num / den, q.ctx)


def _extend(partial: Subspace | None, ambient: Subspace, avoid: Subspace | None, target: int) -> Subspace:
    """Extend ``partial`` by basis vectors of ``ambient`` until it has rank
    ``target`` modulo ``avoid``."""
    n = ambient.ambient_dim
    cur = partial.basis if partial is not None and partial.dim else RationalMatrix([], ncols=0)
    if cur.nrows == 0:
        cur = RationalMatrix.zeros(n, 0)
    base = avoid.basis if avoid is not None and avoid.dim else RationalMatrix.zeros(n, 0)
    r0 = rank(base.hstack(cur))
    for j in range(ambient.dim):
        if cur.ncols >= target:
            break
        cand = cur.hstack(ambient.basis.select_columns([j]))
        r = rank(base.hstack(cand))
        if r > r0:
            cur, r0 = cand, r
    return Subspace(cur)


def _maybe_intersect(X: Subspace, Y: Subspace) -> Subspace | None:
    I = X.basis.hstack(Y.basis)
    if rank(I) == X.dim + Y.dim:
        return None
    return X.intersect(Y)


def construct_complements(q: CycleQuadruple) -> tuple[Subspace, Subspace] | None:
    """Complements C', D' of C∩D with <A,B> inside C' ⊕ D', or None."""
    n = q.n
    if rank(q.C.basis.hstack(q.D.basis)) < n:
        raise NotSpanning()
    U = q.A + q.B
    UC = _maybe_intersect(U, q.C)
    UD = _maybe_intersect(U, q.D)
    dUC = UC.dim if UC else 0
    dUD = UD.dim if UD else 0
    if dUC + dUD != U.dim:
        return None
    CD = _maybe_intersect(q.C, q.D)
    if UC is not None and UD is not None and rank(UC.basis.hstack(UD.basis)) < dUC + dUD:
        return None
    if CD is not None and UC is not None and _maybe_intersect(UC, CD) is not None:
        return None
    if CD is not None and UD is not None and _maybe_intersect(UD, CD) is not None:
        return None
    k = q.p
    Cp = _extend(UC, q.C, CD, k)
    Dp = _extend(UD, q.D, CD, k)
    if Cp.dim != k or Dp.dim != k:
        return None
    return Cp, Dp


class _Frame:
    """Coordinates for V = (C∩D) ⊕ C' ⊕ D'."""

    def __init__(self, CD: Subspace | None, Cp: Subspace, Dp: Subspace):
        n = Cp.ambient_dim
        self.r0 = CD.dim if CD is not None else 0
        self.k = Cp.dim
        parts = [CD.basis] if CD is not None else []
        self.basis = RationalMatrix.zeros(n, 0).hstack(*parts, Cp.basis, Dp.basis)
        if rank(self.basis) < n:
            raise HypothesesFailed("decomposition", "C∩D, C', D' do not form a direct sum")
        self.inv = inverse(self.basis)

    def coords(self, X: RationalMatrix, block: str) -> RationalMatrix:
        Y = (self.inv @ X).tolist()
        lo = {"0": 0, "C": self.r0, "D": self.r0 + self.k}[block]
        hi = lo + (self.r0 if block == "0" else self.k)
        return RationalMatrix(Y[lo:hi], ncols=X.ncols)


def _uniform_exponent(X: RationalMatrix, ctx: ValuationContext) -> int | None:
    S = smith_local(X, ctx)
    if S.rank < X.ncols or len(set(S.exponents)) != 1:
        return None
    return S.exponents[0]


def _check_lattice(L: Lattice, W: Subspace, name: str) -> None:
    if L.rank != W.dim or not Subspace(L.basis).same_as(W):
        raise HypothesesFailed("lattice", f"{name} is not a full-rank lattice in its subspace")


def find_compatible_lattices(
    q: CycleQuadruple, Cp: Subspace, Dp: Subspace, L_A: Lattice | None = None
) -> tuple[Lattice, Lattice]:
    """Lattices L_A in A and L_B in B whose C'- and D'-projections are homothetic.

    With L_A given, only L_B := (p_C'|_B)^-1(p_C'(L_A)) is tried. Otherwise a
    lattice N in C' stable under the (rescaled) transition map between the
    two graphs A and B over C' is searched for by saturation.
    """
    CD = _maybe_intersect(q.C, q.D)
    fr = _Frame(CD, Cp, Dp)
    cA, dA = fr.coords(q.A.basis, "C"), fr.coords(q.A.basis, "D")
    cB, dB = fr.coords(q.B.basis, "C"), fr.coords(q.B.basis, "D")
    if L_A is not None:
        _check_lattice(L_A, q.A, "L_A")
        N = fr.coords(L_A.basis, "C")
    else:
        T = cA @ inverse(dA) @ dB @ inverse(cB)
        v = valuation(determinant(T), q.ctx)
        if v % q.p:
            raise LatticesNotEquivalent("transition map has determinant of non-divisible valuation")
        Tn = T.scale(Fraction(q.ctx.prime) ** (-(v // q.p)))
        N = RationalMatrix.identity(q.p)
        for _ in range(64):
            N2 = hermite_form(N.hstack(Tn @ N), q.ctx)
            if N2 == N:
                break
            N = N2
        else:
            raise LatticesNotEquivalent("no lattice in C' is stable under the transition map")
        L_A = Lattice(q.A.basis @ inverse(cA) @ N, q.ctx)
    L_B = Lattice(q.B.basis @ inverse(cB) @ N, q.ctx)
    return L_A, L_B


def scalar_valuations(
    q: CycleQuadruple, Cp: Subspace, Dp: Subspace, L_A: Lattice, L_B: Lattice
) -> tuple[int, int]:
    """(v(α), v(β)) with p_C'(L_B) = α p_C'(L_A) and p_D'(L_B) = β p_D'(L_A)."""
    CD = _maybe_intersect(q.C, q.D)
    fr = _Frame(CD, Cp, Dp)
    out = []
    for block in ("C", "D"):
        X = fr.coords(L_A.basis, block)
        Y = fr.coords(L_B.basis, block)
        if rank(X) < q.p or rank(Y) < q.p:
            raise HypothesesFailed("projection", "projection of A or B is not onto " + block + "'")
        e = _uniform_exponent(inverse(X) @ Y, q.ctx)
        if e is None:
            raise LatticesNotEquivalent(f"projections to {block}' are not homothetic")
        out.append(e)
    return out[0], out[1]


def _projected_lattices(q: CycleQuadruple, data: GateData):
    fr = _Frame(data.CD, data.Cprime, data.Dprime)
    X = fr.inv @ data.L_A.basis
    rows = X.tolist()
    r0, k = fr.r0, fr.k
    zero = Fraction(0)
    pc = RationalMatrix([[x if r0 <= i < r0 + k else zero for x in row] for i, row in enumerate(rows)], ncols=k)
    pd = RationalMatrix([[x if i >= r0 + k else zero for x in row] for i, row in enumerate(rows)], ncols=k)
    return fr.basis @ pc, fr.basis @ pd


def gate_data(q: CycleQuadruple, L_A: Lattice | None = None, L_B: Lattice | None = None) -> GateData:
    """Check the gate formula's hypotheses and assemble the data it needs."""
    comp = construct_complements(q)
    if comp is None:
        raise HypothesesFailed("complements", "no complements C', D' with <A,B> in C' ⊕ D'")
    Cp, Dp = comp
    if L_B is not None and L_A is None:
        raise ValueError("L_B given without L_A")
    if L_B is None:
        L_A, L_B = find_compatible_lattices(q, Cp, Dp, L_A)
    _check_lattice(L_A, q.A, "L_A")
    _check_lattice(L_B, q.B, "L_B")
    a, b = scalar_valuations(q, Cp, Dp, L_A, L_B)
    CD = _maybe_intersect(q.C, q.D)
    M0 = Lattice(CD.basis, q.ctx) if CD is not None else None
    return GateData(Cp, Dp, L_A, L_B, M0, a, b, CD)


def build_geodesic(q: CycleQuadruple, data: GateData) -> CombinatorialGeodesic:
    """Geodesic through {M0 ⊕ M_C' + p^k M_D'}, oriented from C to D'."""
    MC, MD = _projected_lattices(q, data)
    Mw = MC if data.M0 is None else data.M0.basis.hstack(MC)
    W = q.C
    return geodesic_between(W, data.Dprime, Lattice(Mw, q.ctx), Lattice(MD, q.ctx))


def gate_vertex_constructive(q: CycleQuadruple, data: GateData, which: str, gamma=None) -> LatticeClass:
    gamma = gamma or build_geodesic(q, data)
    if which == "A":
        return gamma.vertex(0)
    if which == "B":
        return gamma.vertex(data.beta_val - data.alpha_val)
    raise ValueError("which must be 'A' or 'B'")


def gate_index(gamma: CombinatorialGeodesic, W_target: Subspace, window: tuple[int, int]) -> int:
    """Index of the first vertex (in decreasing k) whose half-geodesic towards
    W_target leaves gamma immediately."""
    k_min, k_max = window
    for k in range(k_max, k_min - 1, -1):
        x = gamma.vertex(k)
        nxt = half_geodesic_vertex(x, W_target, 1)
        if nxt != gamma.vertex(k - 1) and nxt != gamma.vertex(k + 1):
            return k
    raise GateNotFound(f"no gate in window [{k_min}, {k_max}]")


def gate_vertex_search(gamma: CombinatorialGeodesic, W_target: Subspace, window: tuple[int, int]) -> LatticeClass:
    return gamma.vertex(gate_index(gamma, W_target, window))


def gate_window(q: CycleQuadruple, data: GateData) -> tuple[int, int]:
    """[-S-2, S+2] with S bounding the invariant-factor spread of L_B relative to L_A."""
    fr = _Frame(data.CD, data.Cprime, data.Dprime)
    S = 0
    for block in ("C", "D"):
        X = fr.coords(data.L_A.basis, block)
        Y = fr.coords(data.L_B.basis, block)
        exps = smith_local(inverse(X) @ Y, q.ctx).exponents
        S += max(abs(e) for e in exps)
    return -S - 2, S + 2


def distor(gamma: CombinatorialGeodesic, x: LatticeClass, y: LatticeClass, window: tuple[int, int] = (-64, 64)) -> int:
    """Oriented distance from x to y along gamma (orientation: decreasing k)."""
    from .building import on_geodesic

    kx = on_geodesic(gamma, x, window)
    ky = on_geodesic(gamma, y, window)
    if kx is None or ky is None:
        raise NotOnGeodesic("vertex not found on the geodesic within the window")
    return kx - ky


@dataclass
class GeometricResult:
    value: int
    distor: int | None = None
    k_A: int | None = None
    k_B: int | None = None
    gate_A: LatticeClass | None = None
    gate_B: LatticeClass | None = None
    constructive_agrees: bool | None = None
    data: GateData | None = None
    degenerate: str | None = None
    diagnostics: dict = field(default_factory=dict)


def intersection_geometric_details(
    q: CycleQuadruple, L_A: Lattice | None = None, L_B: Lattice | None = None
) -> GeometricResult:
    bad = q.improper_pairs()
    if bad:
        raise ImproperIntersection("nonzero intersections: " + ", ".join(bad))
    if rank(q.C.basis.hstack(q.D.basis)) < q.n:
        raise NotSpanning()
    if q.A.same_as(q.B):
        return GeometricResult(0, degenerate="A = B")
    if q.p == 1:
        U = q.A + q.B
        UC, UD = U.intersect(q.C), U.intersect(q.D)
        if UC.same_as(UD):
            return GeometricResult(0, degenerate="<A,B>∩C = <A,B>∩D")
    data = gate_data(q, L_A, L_B)
    gamma = build_geodesic(q, data)
    window = gate_window(q, data)
    kA = gate_index(gamma, q.A, window)
    kB = gate_index(gamma, q.B, window)
    d = kA - kB
    agrees = kA == 0 and kB == data.beta_val - data.alpha_val
    return GeometricResult(
        value=q.p * d,
        distor=d,
        k_A=kA,
        k_B=kB,
        gate_A=gamma.vertex(kA),
        gate_B=gamma.vertex(kB),
        constructive_agrees=agrees,
        data=data,
        diagnostics={"window": list(window), "alpha_val": data.alpha_val, "beta_val": data.beta_val},
    )


def intersection_geometric(q: CycleQuadruple, L_A: Lattice | None = None, L_B: Lattice | None = None) -> int:
    """p * distor(A*γ, B*γ), with both gates located by search along γ."""
    return intersection_geometric_details(q, L_A, L_B).value
