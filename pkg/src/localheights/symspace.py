"""The symmetric space SL(n, C)/SU(n) realised as det-1 positive-definite Hermitian matrices.

A coset gK is stored as H = g g^†; the group acts by H -> g H g^†.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize

HERMITIAN_TOL = 1e-12
DET_TOL = 1e-9
RANK_TOL = 1e-9


class NotPositiveDefinite(ValueError):
    pass


class NotTangent(ValueError):
    pass


class NoRoot(RuntimeError):
    pass


class NotComplementary(ValueError):
    pass


class RankDeficient(ValueError):
    pass


def numerical_rank(M: np.ndarray, tol: float = RANK_TOL) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


@dataclass(frozen=True)
class SpacePoint:
    H: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError("H must be square")
        scale = max(np.abs(H).max(), 1e-300)
        if np.abs(H - H.conj().T).max() > HERMITIAN_TOL * scale:
            raise NotPositiveDefinite("matrix is not Hermitian")
        try:
            np.linalg.cholesky(H)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite("matrix is not positive definite") from exc
        if abs(np.linalg.det(H).real - 1) > DET_TOL:
            raise NotPositiveDefinite("determinant is not 1")
        object.__setattr__(self, "H", H)

    @classmethod
    def normalized(cls, H: np.ndarray) -> "SpacePoint":
        """Symmetrize and rescale a positive-definite matrix to determinant 1."""
        H = np.asarray(H, dtype=complex)
        H = (H + H.conj().T) / 2
        sign, logdet = np.linalg.slogdet(H)
        if sign.real <= 0:
            raise NotPositiveDefinite("matrix is not positive definite")
        return cls(H * np.exp(-logdet.real / H.shape[0]))

    @classmethod
    def identity(cls, n: int) -> "SpacePoint":
        return cls(np.eye(n, dtype=complex))

    @property
    def n(self) -> int:
        return self.H.shape[0]

    def act(self, g: np.ndarray) -> "SpacePoint":
        return SpacePoint.normalized(g @ self.H @ g.conj().T)


@dataclass(frozen=True)
class ComplexSubspace:
    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex)
        if B.ndim == 1:
            B = B[:, None]
        if numerical_rank(B) != B.shape[1]:
            raise RankDeficient("subspace basis has dependent columns")
        object.__setattr__(self, "basis", B)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def transform(self, g: np.ndarray) -> "ComplexSubspace":
        return ComplexSubspace(g @ self.basis)

    def same_as(self, other: "ComplexSubspace") -> bool:
        return self.dim == other.dim and numerical_rank(np.hstack([self.basis, other.basis])) == self.dim


def ray_exponents(n: int, r: int) -> tuple[float, float]:
    """(rho, sigma) making diag(rho x r, sigma x (n-r)) trace-free of Killing norm 1."""
    if not 0 < r < n:
        raise ValueError("need 0 < r < n")
    rho = np.sqrt((n - r) / (4 * r * n**2))
    return rho, -r / (n - r) * rho


@dataclass(frozen=True)
class RayParams:
    g: np.ndarray
    r: int
    rho: float
    sigma: float

    @classmethod
    def make(cls, g: np.ndarray, r: int) -> "RayParams":
        rho, sigma = ray_exponents(g.shape[0], r)
        return cls(np.asarray(g, dtype=complex), r, rho, sigma)

    @property
    def n(self) -> int:
        return self.g.shape[0]

    @property
    def direction(self) -> np.ndarray:
        """Diagonal direction X in the frame g."""
        return np.diag([self.rho] * self.r + [self.sigma] * (self.n - self.r)).astype(complex)


@dataclass(frozen=True)
class ArchGeodesic:
    """t -> g exp(tX) K; increasing t runs towards the span of the first r columns of g."""

    params: RayParams
    W: ComplexSubspace | None = None
    W2: ComplexSubspace | None = None


def distance(z1: SpacePoint, z2: SpacePoint) -> float:
    if z1.n != z2.n:
        raise ValueError("points live in different spaces")
    lam = linalg.eigh(z2.H, z1.H, eigvals_only=True)
    if np.any(lam <= 0):
        raise NotPositiveDefinite("generalized eigenvalues must be positive")
    a = 0.5 * np.log(lam)
    return float(2 * np.sqrt(z1.n) * np.sqrt(np.sum(a**2)))


def point_at(geo: ArchGeodesic | RayParams, t: float) -> SpacePoint:
    P = geo.params if isinstance(geo, ArchGeodesic) else geo
    e = np.exp(2 * t * np.diag(P.direction).real)
    H = (P.g * e) @ P.g.conj().T
    return SpacePoint.normalized(H)


def _unimodular(k: np.ndarray) -> np.ndarray:
    """Rotate the last column's phase so that det = 1 (k has |det| = 1)."""
    k = k.copy()
    k[:, -1] /= np.linalg.det(k)
    return k


def ray_to_boundary(x: SpacePoint, W: ComplexSubspace) -> RayParams:
    """Unit-speed ray from x towards the boundary point of W."""
    n, r = x.n, W.dim
    if W.ambient_dim != n:
        raise ValueError("dimension mismatch")
    if not 0 < r < n:
        raise ValueError("need 0 < dim W < n")
    f = np.linalg.cholesky(x.H)
    Y = linalg.solve_triangular(f, W.basis, lower=True)
    if numerical_rank(Y) < r:
        raise RankDeficient("subspace basis is degenerate")
    k, _ = np.linalg.qr(Y, mode="complete")
    return RayParams.make(f @ _unimodular(k), r)


def _orthonormal_for(basis: np.ndarray, gram: np.ndarray) -> np.ndarray:
    L = np.linalg.cholesky(gram)
    return basis @ np.linalg.inv(L.conj().T)


def geodesic_from_metrics(
    W: ComplexSubspace, h: np.ndarray, W2: ComplexSubspace, h2: np.ndarray
) -> ArchGeodesic:
    """Geodesic joining W and W2 attached to metric classes h on W and h2 on W2.

    h, h2 are Gram matrices of the given bases. Increasing t runs towards W.
    """
    n = W.ambient_dim
    if W.dim + W2.dim != n or numerical_rank(np.hstack([W.basis, W2.basis])) < n:
        raise NotComplementary("W and W2 are not complementary")
    try:
        g = np.hstack([_orthonormal_for(W.basis, h), _orthonormal_for(W2.basis, h2)])
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("metric is not positive definite") from exc
    g = g * np.abs(np.linalg.det(g)) ** (-1.0 / n)
    return ArchGeodesic(RayParams.make(_unimodular(g), W.dim), W, W2)


def killing_inner(X: np.ndarray, Y: np.ndarray, tol: float = 1e-12) -> float:
    """B(X, Y) = 4n Re Tr(XY) on trace-free Hermitian matrices."""
    for M in (X, Y):
        M = np.asarray(M)
        if np.abs(M - M.conj().T).max() > tol * max(1.0, np.abs(M).max()) or abs(np.trace(M)) > tol:
            raise NotTangent("direction must be Hermitian and trace-free")
    n = X.shape[0]
    return float(4 * n * np.trace(X @ Y).real)


def ray_direction_at(geo: ArchGeodesic, t: float, W_target: ComplexSubspace) -> np.ndarray:
    """Direction of the ray [point(t), z_W] expressed in the frame g exp(tX)."""
    P = geo.params
    X = np.diag(P.direction).real
    Y = np.exp(-t * X)[:, None] * np.linalg.solve(P.g, W_target.basis)
    Q, _ = np.linalg.qr(Y)
    rho, sigma = ray_exponents(P.n, W_target.dim)
    return sigma * np.eye(P.n) + (rho - sigma) * (Q @ Q.conj().T)


def orthogonality(geo: ArchGeodesic, W_target: ComplexSubspace, t: float) -> float:
    """Killing inner product of the geodesic direction with the ray towards W_target at point(t)."""
    P = geo.params
    x = np.diag(P.direction).real
    Y = np.exp(-t * x)[:, None] * np.linalg.solve(P.g, W_target.basis)
    Q, _ = np.linalg.qr(Y)
    w = np.sum(np.abs(Q) ** 2, axis=1)
    rho, sigma = ray_exponents(P.n, W_target.dim)
    return float(4 * P.n * (rho - sigma) * np.dot(w, x))


@dataclass
class GatePoint:
    t: float
    point: SpacePoint
    residual: float
    sign_changes: list = field(default_factory=list)


def gate_point(
    geo: ArchGeodesic,
    W_target: ComplexSubspace,
    hint: float | None = None,
    T: float = 50.0,
    step: float = 0.25,
) -> GatePoint:
    """Point of geo where the ray towards W_target is Killing-orthogonal to geo."""
    f = lambda t: orthogonality(geo, W_target, t)
    brackets = []
    if hint is not None and np.isfinite(hint):
        lo, hi, w = hint - 1.0, hint + 1.0, 1.0
        while w < 4 * T:
            if f(lo) * f(hi) <= 0:
                brackets.append((lo, hi))
                break
            w *= 2
            lo, hi = hint - w, hint + w
    grid = np.arange(-T, T + step / 2, step)
    vals = np.array([f(t) for t in grid])
    changes = [(grid[i], grid[i + 1]) for i in range(len(grid) - 1) if vals[i] == 0 or vals[i] * vals[i + 1] < 0]
    if not brackets:
        brackets = changes[:1]
    if not brackets:
        raise NoRoot("orthogonality function has no sign change on the search interval")
    lo, hi = brackets[0]
    if f(lo) == 0:
        t_star = lo
    else:
        t_star = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return GatePoint(t_star, point_at(geo, t_star), abs(f(t_star)), [float(0.5 * (a + b)) for a, b in changes])
