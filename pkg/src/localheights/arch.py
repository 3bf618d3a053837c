"""Local intersection numbers of linear cycles at the Archimedean place.

Three independent evaluations of <P(A) - P(B), P(C) - P(D)> over C^n:
the closed form 2p log(beta/alpha), the oriented distance between gate points
on a geodesic of SL(n, C)/SU(n), and (for lines A, B) direct evaluation of
the Levine forms of C and D.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .symspace import (
    ArchGeodesic,
    ComplexSubspace,
    gate_point,
    geodesic_from_metrics,
    numerical_rank,
    ray_direction_at,
    killing_inner,
)

PROPORTIONAL_TOL = 1e-9


class SingularProjection(ValueError):
    pass


class NotProportional(ValueError):
    pass


class WrongCodimension(ValueError):
    pass


class ImproperIntersection(ValueError):
    pass


class HypothesesFailed(ValueError):
    def __init__(self, condition: str, message: str | None = None):
        super().__init__(message or condition)
        self.condition = condition


@dataclass(frozen=True)
class MetricClass:
    subspace: ComplexSubspace
    gram: np.ndarray

    def __post_init__(self):
        G = np.asarray(self.gram, dtype=complex)
        if G.shape != (self.subspace.dim, self.subspace.dim):
            raise ValueError("Gram matrix does not match the subspace dimension")
        if np.abs(G - G.conj().T).max() > 1e-12 * max(1.0, np.abs(G).max()):
            raise ValueError("Gram matrix is not Hermitian")
        np.linalg.cholesky(G)
        object.__setattr__(self, "gram", G)

    def normalized_gram(self) -> np.ndarray:
        d = self.gram.shape[0]
        return self.gram / np.linalg.det(self.gram).real ** (1.0 / d)

    def same_class(self, other: "MetricClass") -> bool:
        try:
            metric_proportionality(self, other)
        except NotProportional:
            return False
        return True

    def scaled(self, c: float) -> "MetricClass":
        return MetricClass(self.subspace, c * self.gram)


def orthonormal_metric(W: ComplexSubspace) -> MetricClass:
    """The metric class for which the given basis of W is orthonormal."""
    return MetricClass(W, np.eye(W.dim, dtype=complex))


@dataclass(frozen=True)
class ArchQuadruple:
    A: ComplexSubspace
    B: ComplexSubspace
    C: ComplexSubspace
    D: ComplexSubspace
    h_A: MetricClass | None = None
    h_B: MetricClass | None = None
    h0_gram: np.ndarray | None = None

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

    def metric_A(self) -> MetricClass:
        return self.h_A if self.h_A is not None else orthonormal_metric(self.A)

    def metric_B(self) -> MetricClass:
        return self.h_B if self.h_B is not None else orthonormal_metric(self.B)

    def swap_ab(self) -> "ArchQuadruple":
        return ArchQuadruple(self.B, self.A, self.C, self.D, self.h_B, self.h_A, self.h0_gram)

    def swap_cd(self) -> "ArchQuadruple":
        return ArchQuadruple(self.A, self.B, self.D, self.C, self.h_A, self.h_B, self.h0_gram)

    def improper_pairs(self) -> list[str]:
        bad = []
        for x, X in (("A", self.A), ("B", self.B)):
            for y, Y in (("C", self.C), ("D", self.D)):
                if numerical_rank(np.hstack([X.basis, Y.basis])) < self.n:
                    bad.append(x + y)
        return bad


@dataclass(frozen=True)
class ArchGateData:
    Cprime: ComplexSubspace
    Dprime: ComplexSubspace
    h_A: MetricClass
    h_B: MetricClass
    h0: MetricClass | None
    alpha: float
    beta: float
    CD: ComplexSubspace | None = None
    h_Cprime: MetricClass | None = None
    h_Dprime: MetricClass | None = None


def metric_pushforward(h: MetricClass, target: ComplexSubspace, T: np.ndarray) -> MetricClass:
    """Push h forward along a map U -> U' whose matrix in the given bases is T.

    T satisfies proj(U.basis) = target.basis @ T; the result is h o proj^-1.
    """
    T = np.asarray(T, dtype=complex)
    if T.shape[0] != T.shape[1] or numerical_rank(T) < T.shape[0]:
        raise SingularProjection("projection is not invertible on the subspace")
    Ti = np.linalg.inv(T)
    G = Ti.conj().T @ h.gram @ Ti
    return MetricClass(target, (G + G.conj().T) / 2)


def metric_proportionality(h1: MetricClass, h2: MetricClass, tol: float = PROPORTIONAL_TOL) -> float:
    """c > 0 with h2 = c h1, or NotProportional."""
    G1, G2 = h1.gram, h2.gram
    d = G1.shape[0]
    c = float(np.trace(np.linalg.solve(G1, G2)).real / d)
    if c <= 0 or np.linalg.norm(G2 - c * G1) > tol * np.linalg.norm(G2):
        raise NotProportional("metrics are not proportional")
    return c


def _null_space(M: np.ndarray) -> np.ndarray:
    if M.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    u, s, vh = np.linalg.svd(M)
    tol = 1e-9 * (s[0] if s.size and s[0] > 0 else 1.0)
    r = int(np.sum(s > tol))
    return vh[r:].conj().T


def intersect(X: ComplexSubspace, Y: ComplexSubspace) -> ComplexSubspace | None:
    N = _null_space(np.hstack([X.basis, -Y.basis]))
    if N.shape[1] == 0:
        return None
    V = X.basis @ N[: X.dim]
    Q, _ = np.linalg.qr(V)
    return ComplexSubspace(Q)


def _span(*parts: ComplexSubspace | None) -> ComplexSubspace:
    M = np.hstack([P.basis for P in parts if P is not None])
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > 1e-9 * s[0]))
    return ComplexSubspace(U[:, :r])


def _extend(partial: ComplexSubspace | None, ambient: ComplexSubspace, avoid: ComplexSubspace | None, target: int) -> ComplexSubspace | None:
    n = ambient.ambient_dim
    cur = partial.basis if partial is not None else np.zeros((n, 0), dtype=complex)
    base = avoid.basis if avoid is not None else np.zeros((n, 0), dtype=complex)
    r0 = numerical_rank(np.hstack([base, cur]))
    for j in range(ambient.dim):
        if cur.shape[1] >= target:
            break
        cand = np.hstack([cur, ambient.basis[:, j : j + 1]])
        r = numerical_rank(np.hstack([base, cand]))
        if r > r0:
            cur, r0 = cand, r
    if cur.shape[1] != target:
        return None
    return ComplexSubspace(cur)


def construct_complements(q: ArchQuadruple) -> tuple[ComplexSubspace, ComplexSubspace] | None:
    if numerical_rank(np.hstack([q.C.basis, q.D.basis])) < q.n:
        raise HypothesesFailed("spanning", "C + D is not the whole space")
    U = _span(q.A, q.B)
    UC, UD = intersect(U, q.C), intersect(U, q.D)
    dC = UC.dim if UC else 0
    dD = UD.dim if UD else 0
    if dC + dD != U.dim:
        return None
    CD = intersect(q.C, q.D)
    if UC and UD and numerical_rank(np.hstack([UC.basis, UD.basis])) < dC + dD:
        return None
    if CD is not None and ((UC and intersect(UC, CD)) or (UD and intersect(UD, CD))):
        return None
    Cp = _extend(UC, q.C, CD, q.p)
    Dp = _extend(UD, q.D, CD, q.p)
    if Cp is None or Dp is None:
        return None
    return Cp, Dp


class _Frame:
    def __init__(self, CD: ComplexSubspace | None, Cp: ComplexSubspace, Dp: ComplexSubspace):
        self.r0 = CD.dim if CD is not None else 0
        self.k = Cp.dim
        parts = ([CD.basis] if CD is not None else []) + [Cp.basis, Dp.basis]
        self.basis = np.hstack(parts)
        if numerical_rank(self.basis) < self.basis.shape[0]:
            raise HypothesesFailed("decomposition", "C∩D, C', D' do not form a direct sum")

    def coords(self, X: np.ndarray, block: str) -> np.ndarray:
        Y = np.linalg.solve(self.basis, X)
        lo = {"C": self.r0, "D": self.r0 + self.k}[block]
        return Y[lo : lo + self.k]


def gate_data(q: ArchQuadruple) -> ArchGateData:
    comp = construct_complements(q)
    if comp is None:
        raise HypothesesFailed("complements", "no complements C', D' with <A,B> in C' ⊕ D'")
    Cp, Dp = comp
    CD = intersect(q.C, q.D)
    fr = _Frame(CD, Cp, Dp)
    hA, hB = q.metric_A(), q.metric_B()
    scal = []
    pushed = []
    for block, target in (("C", Cp), ("D", Dp)):
        try:
            pa = metric_pushforward(hA, target, fr.coords(q.A.basis, block))
            pb = metric_pushforward(hB, target, fr.coords(q.B.basis, block))
        except SingularProjection as exc:
            raise HypothesesFailed("projection", str(exc)) from exc
        try:
            c = metric_proportionality(pb, pa)
        except NotProportional as exc:
            raise HypothesesFailed("equivalence", f"pushed metrics on {block}' are not proportional") from exc
        scal.append(np.sqrt(c))
        pushed.append(pa)
    h0 = None
    if CD is not None:
        G0 = q.h0_gram if q.h0_gram is not None else np.eye(CD.dim, dtype=complex)
        h0 = MetricClass(CD, G0)
    return ArchGateData(Cp, Dp, hA, hB, h0, scal[0], scal[1], CD, pushed[0], pushed[1])


def _degenerate(q: ArchQuadruple) -> str | None:
    bad = q.improper_pairs()
    if bad:
        raise ImproperIntersection("nonzero intersections: " + ", ".join(bad))
    if numerical_rank(np.hstack([q.C.basis, q.D.basis])) < q.n:
        raise HypothesesFailed("spanning", "C + D is not the whole space")
    if q.A.same_as(q.B):
        return "A = B"
    if q.p == 1:
        U = _span(q.A, q.B)
        UC, UD = intersect(U, q.C), intersect(U, q.D)
        if UC is not None and UD is not None and UC.same_as(UD):
            return "<A,B>∩C = <A,B>∩D"
    return None


def intersection_closed_form(q: ArchQuadruple) -> float:
    """2p log(beta/alpha)."""
    if _degenerate(q):
        return 0.0
    data = gate_data(q)
    return float(2 * q.p * np.log(data.beta / data.alpha))


def build_geodesic(q: ArchQuadruple, data: ArchGateData) -> ArchGeodesic:
    """Geodesic for (C with h0 ⊕ h_C', D' with h_D'); increasing t runs towards C."""
    if data.CD is not None:
        WC = ComplexSubspace(np.hstack([data.CD.basis, data.Cprime.basis]))
        G = linalg.block_diag(data.h0.gram, data.h_Cprime.gram)
    else:
        WC = data.Cprime
        G = data.h_Cprime.gram
    return geodesic_from_metrics(WC, G, data.Dprime, data.h_Dprime.gram)


def gate_hint(q: ArchQuadruple, alpha: float, beta: float) -> float:
    """Closed-form gate parameter (for target B; alpha = beta = 1 gives the A gate)."""
    n, p, qq = q.n, q.p, q.q
    rho = np.sqrt(qq / (4 * p * n**2))
    return -qq / (2 * n * rho) * np.log(qq * beta**2 / (p * alpha**2))


@dataclass
class ArchGeometricResult:
    value: float
    distor: float | None = None
    t_A: float | None = None
    t_B: float | None = None
    alpha: float | None = None
    beta: float | None = None
    residual_A: float | None = None
    residual_B: float | None = None
    degenerate: str | None = None
    diagnostics: dict = field(default_factory=dict)


def intersection_geometric_details(q: ArchQuadruple, use_hint: bool = True) -> ArchGeometricResult:
    deg = _degenerate(q)
    if deg:
        return ArchGeometricResult(0.0, degenerate=deg)
    data = gate_data(q)
    gamma = build_geodesic(q, data)
    hA = gate_hint(q, 1.0, 1.0) if use_hint else None
    hB = gate_hint(q, data.alpha, data.beta) if use_hint else None
    gA = gate_point(gamma, q.A, hint=hA)
    gB = gate_point(gamma, q.B, hint=hB)
    # γ is oriented from C to D', i.e. along decreasing t
    d = gA.t - gB.t
    return ArchGeometricResult(
        value=float(np.sqrt(q.p / q.q) * d),
        distor=float(d),
        t_A=gA.t,
        t_B=gB.t,
        alpha=data.alpha,
        beta=data.beta,
        residual_A=gA.residual,
        residual_B=gB.residual,
        diagnostics={"sign_changes_A": gA.sign_changes, "sign_changes_B": gB.sign_changes},
    )


def intersection_geometric(q: ArchQuadruple) -> float:
    """sqrt(p/q) * distor(A*γ, B*γ) with gates found by root-finding."""
    return intersection_geometric_details(q).value


def gate_orthogonality(q: ArchQuadruple, which: str = "A") -> float:
    """Killing inner product between γ and the ray towards A (or B) at the gate."""
    data = gate_data(q)
    gamma = build_geodesic(q, data)
    W = q.A if which == "A" else q.B
    g = gate_point(gamma, W)
    X = gamma.params.direction
    Y = ray_direction_at(gamma, g.t, W)
    return killing_inner(X, Y, tol=1e-9)


def levine_pairing_p1(q: ArchQuadruple, metric: np.ndarray | None = None) -> float:
    """[Λ_C - Λ_D](a) - [Λ_C - Λ_D](b) for lines A = <a>, B = <b>.

    Λ_W = τ - σ_W with τ = log Σ|z_i|² and σ_W = log|z_1|², where z_1, ..., z_n
    is a dual basis orthonormal for the dual of ``metric`` whose first member
    cuts out the hyperplane W.
    """
    if q.p != 1:
        raise WrongCodimension("the Levine evaluation is implemented for lines only")
    n = q.n
    H = np.eye(n, dtype=complex) if metric is None else np.asarray(metric, dtype=complex)
    Hd = np.linalg.inv(H)

    def levine(W: ComplexSubspace):
        f = _null_space(W.basis.conj().T).conj().T
        if f.shape[0] != 1:
            raise WrongCodimension("C and D must be hyperplanes")
        Z = _dual_orthonormal(f[0], Hd)

        def lam(x):
            vals = Z @ x
            return np.log(np.sum(np.abs(vals) ** 2)) - np.log(np.abs(vals[0]) ** 2)

        return lam

    lC, lD = levine(q.C), levine(q.D)
    a, b = q.A.basis[:, 0], q.B.basis[:, 0]
    return float((lC(a) - lD(a)) - (lC(b) - lD(b)))


def _dual_orthonormal(f: np.ndarray, Hd: np.ndarray) -> np.ndarray:
    """Rows z_1 ∝ f, z_2, ... orthonormal for <z, w> = z Hd w^†."""
    n = f.shape[0]
    rows = [f]
    for i in range(n):
        e = np.zeros(n, dtype=complex)
        e[i] = 1
        rows.append(e)
    out = []
    for z in rows:
        for u in out:
            z = z - (z @ Hd @ u.conj()) * u
        nrm = np.sqrt((z @ Hd @ z.conj()).real)
        if nrm > 1e-10:
            out.append(z / nrm)
        if len(out) == n:
            break
    return np.array(out)
