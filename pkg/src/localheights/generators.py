"""Random instance families built in the adapted frame of the gate formula.

Every generator returns the instance together with its expected value, which
is computed from the scalars used to build it and not from either method.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np

from .building import Lattice, Subspace
from .exact import RationalMatrix, ValuationContext, determinant, rank
from .nonarch import CycleQuadruple

if TYPE_CHECKING:
    from .arch import ArchQuadruple


@dataclass
class NonarchInstance:
    quad: CycleQuadruple
    L_A: Lattice | None
    L_B: Lattice | None
    expected: int
    alpha_val: int | None = None
    beta_val: int | None = None
    family: str = "adapted"


def _rand_unit(rng, prime: int, bound: int = 6) -> Fraction:
    while True:
        a = int(rng.integers(1, bound + 1)) * (1 if rng.random() < 0.5 else -1)
        b = int(rng.integers(1, bound + 1))
        if a % prime and b % prime:
            return Fraction(a, b)


def _rand_int_matrix(rng, r: int, c: int, bound: int = 3) -> list[list[int]]:
    return rng.integers(-bound, bound + 1, size=(r, c)).tolist()


def random_invertible(rng, d: int, bound: int = 3) -> RationalMatrix:
    while True:
        M = RationalMatrix(_rand_int_matrix(rng, d, d, bound))
        if determinant(M) != 0:
            return M


def random_gl_local(rng, d: int, prime: int, bound: int = 4) -> RationalMatrix:
    """Random element of GL_d(Z_(p)): integral with unit determinant."""
    while True:
        M = RationalMatrix(_rand_int_matrix(rng, d, d, bound))
        det = determinant(M)
        if det != 0 and det.numerator % prime:
            return M


def _rand_scalar(rng, prime: int, kmax: int) -> tuple[Fraction, int]:
    k = int(rng.integers(-kmax, kmax + 1))
    return Fraction(prime) ** k * _rand_unit(rng, prime), k


def _embed(block: RationalMatrix, n: int, offset: int) -> RationalMatrix:
    rows = [[Fraction(0)] * block.ncols for _ in range(n)]
    for i in range(block.nrows):
        for j in range(block.ncols):
            rows[offset + i][j] = block[i, j]
    return RationalMatrix(rows, ncols=block.ncols)


def _unit_vectors(n: int, idx) -> RationalMatrix:
    return RationalMatrix.from_columns([[1 if i == j else 0 for i in range(n)] for j in idx], n)


def nonarch_adapted(
    rng, n: int, p: int, prime: int, kmax: int = 3, conjugate: bool = True
) -> NonarchInstance:
    """Instance with D' = <e_1..e_p>, C' = <e_p+1..e_2p>, C∩D = rest, then conjugated."""
    if not 1 <= p <= n - p:
        raise ValueError("need 1 <= p <= n - p")
    ctx = ValuationContext(prime)
    wD = random_invertible(rng, p)
    wC = random_invertible(rng, p)
    UD = random_gl_local(rng, p, prime)
    UC = random_gl_local(rng, p, prime)
    alpha, va = _rand_scalar(rng, prime, kmax)
    beta, vb = _rand_scalar(rng, prime, kmax)
    a = _embed(wD, n, 0) + _embed(wC, n, p)
    b = _embed((wD @ UD).scale(beta), n, 0) + _embed((wC @ UC).scale(alpha), n, p)
    Dp = _unit_vectors(n, range(p))
    Cp = _unit_vectors(n, range(p, 2 * p))
    CD = _unit_vectors(n, range(2 * p, n))
    C = CD.hstack(Cp)
    D = CD.hstack(Dp)
    if conjugate:
        G = random_invertible(rng, n, 2)
        a, b, C, D = G @ a, G @ b, G @ C, G @ D
        C = C @ random_invertible(rng, C.ncols, 2)
        D = D @ random_invertible(rng, D.ncols, 2)
    quad = CycleQuadruple(
        Subspace(a @ random_invertible(rng, p, 2)),
        Subspace(b @ random_invertible(rng, p, 2)),
        Subspace(C),
        Subspace(D),
        ctx,
    )
    return NonarchInstance(quad, Lattice(a, ctx), Lattice(b, ctx), p * (va - vb), va, vb)


def nonarch_degenerate_p1(rng, n: int, prime: int) -> NonarchInstance:
    """p = 1 instance with <A,B>∩C = <A,B>∩D; the pairing vanishes."""
    if n < 3:
        raise ValueError("the degenerate family needs n >= 3")
    ctx = ValuationContext(prime)
    G = random_invertible(rng, n, 2)
    e = lambda i: [1 if j == i else 0 for j in range(n)]
    # C = <e_2..e_n>, D = <e_1 + e_2, e_3..e_n>; C∩D = <e_3..e_n>
    C = RationalMatrix.from_columns([e(i) for i in range(1, n)], n)
    D = RationalMatrix.from_columns([[1, 1] + [0] * (n - 2)] + [e(i) for i in range(2, n)], n)
    w = [0, 0] + [int(x) for x in rng.integers(-3, 4, size=n - 2)]
    if not any(w):
        w[2] = 1
    lam = _rand_unit(rng, prime) * Fraction(prime) ** int(rng.integers(-2, 3))
    mu = Fraction(int(rng.integers(1, 5)))
    a = [1, 2] + [int(x) for x in rng.integers(-3, 4, size=n - 2)]
    b = [lam * x + mu * y for x, y in zip(a, w)]
    A = G @ RationalMatrix.from_columns([a], n)
    B = G @ RationalMatrix.from_columns([b], n)
    quad = CycleQuadruple(Subspace(A), Subspace(B), Subspace(G @ C), Subspace(G @ D), ctx)
    return NonarchInstance(quad, None, None, 0, family="degenerate")


def nonarch_example(prime: int) -> NonarchInstance:
    """A = <e1+e2>, B = <e1+p e2>, C = <e1>, D = <e2>; value -1."""
    ctx = ValuationContext(prime)
    S = Subspace.from_vectors
    quad = CycleQuadruple(S([1, 1]), S([1, prime]), S([1, 0]), S([0, 1]), ctx)
    return NonarchInstance(quad, Lattice(quad.A.basis, ctx), Lattice(quad.B.basis, ctx), -1, 0, 1, "example")


def proper(quad: CycleQuadruple) -> bool:
    return not quad.improper_pairs() and rank(quad.C.basis.hstack(quad.D.basis)) == quad.n


@dataclass
class ArchInstance:
    quad: "ArchQuadruple"
    expected: float
    alpha: float | None = None
    beta: float | None = None
    family: str = "adapted"


def _complex_normal(rng, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unitary(rng, d: int) -> np.ndarray:
    Q, R = np.linalg.qr(_complex_normal(rng, d, d))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def _gram_orthonormal(basis: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Gram matrix of ``basis`` for the metric making ``vectors`` orthonormal."""
    X = np.linalg.lstsq(vectors, basis, rcond=None)[0]
    return X.conj().T @ X


def arch_adapted(rng, n: int, p: int, log_spread: float = 1.5, rebase: bool = True) -> ArchInstance:
    """Instance in a random frame F: D' = F[:, :p], C' = F[:, p:2p], C∩D = rest."""
    from .arch import ArchQuadruple, MetricClass
    from .symspace import ComplexSubspace

    if not 1 <= p <= n - p:
        raise ValueError("need 1 <= p <= n - p")
    F = _complex_normal(rng, n, n)
    wD = F[:, :p] @ _complex_normal(rng, p, p)
    wC = F[:, p : 2 * p] @ _complex_normal(rng, p, p)
    UD, UC = random_unitary(rng, p), random_unitary(rng, p)
    alpha = float(np.exp(rng.uniform(-log_spread, log_spread)))
    beta = float(np.exp(rng.uniform(-log_spread, log_spread)))
    a = wD + wC
    b = beta * (wD @ UD) + alpha * (wC @ UC)
    CD = F[:, 2 * p :]
    C = np.hstack([CD, F[:, p : 2 * p]])
    D = np.hstack([CD, F[:, :p]])
    RA = RB = np.eye(p)
    if rebase:
        RA, RB = _complex_normal(rng, p, p), _complex_normal(rng, p, p)
        C = C @ _complex_normal(rng, n - p, n - p)
        D = D @ _complex_normal(rng, n - p, n - p)
    A_basis, B_basis = a @ RA, b @ RB
    A, B = ComplexSubspace(A_basis), ComplexSubspace(B_basis)
    hA = MetricClass(A, _gram_orthonormal(A_basis, a) * np.exp(rng.uniform(-1, 1)))
    hB = MetricClass(B, _gram_orthonormal(B_basis, b) * np.exp(rng.uniform(-1, 1)))
    h0 = None
    if n > 2 * p:
        Z = _complex_normal(rng, n - 2 * p, n - 2 * p)
        h0 = Z.conj().T @ Z + np.eye(n - 2 * p)
    quad = ArchQuadruple(A, B, ComplexSubspace(C), ComplexSubspace(D), hA, hB, h0)
    return ArchInstance(quad, 2 * p * float(np.log(beta / alpha)), alpha, beta)


def arch_degenerate_p1(rng, n: int) -> ArchInstance:
    """Lines a, b with <a,b>∩C = <a,b>∩D; the pairing vanishes."""
    from .arch import ArchQuadruple
    from .symspace import ComplexSubspace

    if n < 3:
        raise ValueError("the degenerate family needs n >= 3")
    G = _complex_normal(rng, n, n)
    E = np.eye(n, dtype=complex)
    C = E[:, 1:]
    D = np.hstack([(E[:, 0] + E[:, 1])[:, None], E[:, 2:]])
    w = np.concatenate([[0, 0], _complex_normal(rng, n - 2)])
    a = np.concatenate([[1, 2], _complex_normal(rng, n - 2)])
    b = complex(_complex_normal(rng, 1)[0]) * a + w
    quad = ArchQuadruple(
        ComplexSubspace(G @ a[:, None]),
        ComplexSubspace(G @ b[:, None]),
        ComplexSubspace(G @ C),
        ComplexSubspace(G @ D),
    )
    return ArchInstance(quad, 0.0, family="degenerate")


def arch_example():
    """A = <e1+e2>, B = <e1+2e2>, C = <e1>, D = <e2>; value 2 log 2."""
    from .arch import ArchQuadruple
    from .symspace import ComplexSubspace

    S = lambda *v: ComplexSubspace(np.array(v, dtype=complex)[:, None])
    return ArchInstance(ArchQuadruple(S(1, 1), S(1, 2), S(1, 0), S(0, 1)), 2 * float(np.log(2)), 1.0, 2.0, "example")
