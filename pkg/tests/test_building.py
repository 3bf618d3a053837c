import random
from fractions import Fraction

import pytest
from oracles import ball, perturbed, random_class, random_subspace

from localheights.building import (
    DimensionMismatch,
    Lattice,
    NotComplementary,
    RankDeficient,
    Subspace,
    adjacent,
    class_of,
    combinatorial_distance,
    geodesic_between,
    half_geodesic,
    half_geodesic_vertex,
    inclusion_bounds,
    lattice_class,
    on_geodesic,
    reduction_segment_equal,
    split_basis,
    standard_lattice,
)
from localheights.exact import RationalMatrix, ValuationContext, determinant, smith_local, valuation

M = RationalMatrix
S = Subspace.from_vectors


def cls(rows, p):
    return class_of(M(rows), ValuationContext(p))


@pytest.fixture(scope="module")
def balls():
    return {(n, p): ball(n, p, 3) for n, p in [(2, 2), (2, 3), (2, 5), (3, 2), (3, 3)]}


def test_ball_sizes(balls):
    # tree of valence p + 1 for n = 2
    assert len(balls[(2, 3)]) == 1 + 4 + 12 + 36
    assert sum(1 for d in balls[(3, 2)].values() if d == 1) == 14


def test_distance_matches_bfs(balls):
    rng = random.Random(11)
    checked = 0
    for (n, p), depth in balls.items():
        ctx = ValuationContext(p)
        items = sorted(depth.items())
        for _ in range(45):
            key, d = rng.choice(items)
            while True:
                g = M([[rng.randint(-4, 4) for _ in range(n)] for _ in range(n)])
                if determinant(g) != 0:
                    break
            g = g.scale(Fraction(p) ** rng.randint(-2, 2))
            x = class_of(g, ctx)
            y = class_of(g @ M.from_columns(key, n), ctx)
            assert combinatorial_distance(x, y) == d
            assert combinatorial_distance(y, x) == d
            assert adjacent(x, y) == (d == 1)
            checked += 1
    assert checked >= 200


# --- worked examples ---------------------------------------------------------


def test_lattice_class_examples():
    ctx = ValuationContext(3)
    assert lattice_class(standard_lattice(3, ctx).scaled(1)) == lattice_class(standard_lattice(3, ctx))
    x = class_of(M([[1, 0], [0, 9]]), ctx)
    assert smith_local(x.basis, ctx).exponents == (0, 2)
    assert x.basis == M([[1, 0], [0, 9]])
    assert class_of(M([[0, 1], [9, 0]]), ctx) == x
    with pytest.raises(RankDeficient):
        class_of(M([[1, 2], [2, 4]]), ctx)


def test_distance_examples():
    for p in (2, 3, 5):
        I = cls([[1, 0], [0, 1]], p)
        D = cls([[1, 0], [0, p * p]], p)
        assert combinatorial_distance(I, I) == 0
        assert combinatorial_distance(I, D) == 2
        r, s = inclusion_bounds(I, D)
        assert (r, s) == (-2, 0)
        assert combinatorial_distance(I, cls([[p, 0], [0, p]], p)) == 0
        assert combinatorial_distance(cls([[1, 0, 0], [0, 1, 0], [0, 0, 1]], p), cls([[1, 0, 0], [0, p, 0], [0, 0, p * p]], p)) == 2
        assert adjacent(I, cls([[1, 0], [0, p]], p))
        assert not adjacent(I, D)
        assert not adjacent(I, I)


def test_distance_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        combinatorial_distance(cls([[1, 0], [0, 1]], 3), cls([[1, 0, 0], [0, 1, 0], [0, 0, 1]], 3))
    with pytest.raises(DimensionMismatch):
        combinatorial_distance(cls([[1, 0], [0, 1]], 3), cls([[1, 0], [0, 1]], 5))


def test_split_basis_examples():
    ctx = ValuationContext(5)
    I = standard_lattice(2, ctx)
    B = split_basis(I, S([1, 0]))
    assert B.column(0)[1] == 0
    B = split_basis(I, S([1, 1]))
    assert B.column(0) == (1, 1)
    B = split_basis(I, S([1, 5]))
    assert B.column(0) == (1, 5)
    assert valuation(determinant(B), ctx) == 0


def test_half_geodesic_examples():
    p = 3
    ctx = ValuationContext(p)
    x = lattice_class(standard_lattice(2, ctx))
    assert half_geodesic_vertex(x, S([1, 0]), 0) == x
    assert half_geodesic_vertex(x, S([1, 0]), 3) == cls([[1, 0], [0, 27]], p)
    assert half_geodesic_vertex(x, S([1, 1]), 1) == cls([[1, 0], [1, 3]], p)


def test_geodesic_examples():
    ctx = ValuationContext(5)
    W, W2 = S([1, 0]), S([0, 1])
    g = geodesic_between(W, W2, Lattice(W.basis, ctx), Lattice(W2.basis, ctx))
    assert g.vertex(2) == cls([[1, 0], [0, 25]], 5)
    assert g.vertex(0) == cls([[1, 0], [0, 1]], 5)
    for k in range(-5, 5):
        assert adjacent(g.vertex(k), g.vertex(k + 1))
    assert on_geodesic(g, g.vertex(3), (-5, 5)) == 3
    assert on_geodesic(g, cls([[1, 0], [1, 5]], 5), (-5, 5)) is None
    shifted = class_of(g.vertex(-2).basis.scale(Fraction(1, 125)), ctx)
    assert on_geodesic(g, shifted, (-5, 5)) == -2
    with pytest.raises(NotComplementary):
        geodesic_between(W, S([2, 0]), Lattice(W.basis, ctx), Lattice(M([[2], [0]]), ctx))


def test_reduction_segment_examples():
    ctx = ValuationContext(3)
    x = lattice_class(standard_lattice(2, ctx))
    W1, W2 = S([1, 0]), S([1, 3])
    assert reduction_segment_equal(x, W1, W1, 4)
    assert reduction_segment_equal(x, W1, W2, 1)
    assert not reduction_segment_equal(x, W1, W2, 2)


# --- properties -----------------------------------------------------------------


def test_class_invariance_under_local_basis_change():
    rng = random.Random(3)
    for _ in range(60):
        n = rng.randint(1, 5)
        p = rng.choice([2, 3, 5, 13])
        ctx = ValuationContext(p)
        x = random_class(rng, n, p)
        while True:
            u = M([[rng.randint(-5, 5) for _ in range(n)] for _ in range(n)])
            d = determinant(u)
            if d != 0 and valuation(d, ctx) == 0:
                break
        y = class_of((x.basis @ u).scale(Fraction(p) ** rng.randint(-4, 4)), ctx)
        assert y == x


def test_half_geodesic_is_geodesic():
    rng = random.Random(5)
    for _ in range(40):
        n = rng.randint(2, 4)
        p = rng.choice([2, 3, 5])
        x = random_class(rng, n, p)
        W = random_subspace(rng, n, rng.randint(1, n - 1))
        path = half_geodesic(x, W, 5)
        for k, v in enumerate(path):
            assert combinatorial_distance(x, v) == k
            assert v == half_geodesic_vertex(x, W, k)
        for a, b in zip(path, path[1:]):
            assert adjacent(a, b)


def test_reduction_segment_matches_half_geodesics():
    rng = random.Random(9)
    agree = {True: 0, False: 0}
    for _ in range(220):
        n = rng.randint(2, 4)
        p = rng.choice([2, 3, 5])
        x = random_class(rng, n, p)
        d = rng.randint(1, n - 1)
        W1 = random_subspace(rng, n, d)
        # move W1 into x's integral frame so perturbations are p-adically small
        W1 = Subspace(x.basis @ W1.basis)
        W2 = perturbed(rng, W1, p, rng.randint(0, 5)) if rng.random() < 0.8 else random_subspace(rng, n, d)
        m = rng.randint(1, 4)
        lhs = reduction_segment_equal(x, W1, W2, m)
        rhs = all(half_geodesic_vertex(x, W1, j) == half_geodesic_vertex(x, W2, j) for j in range(m + 1))
        assert lhs == rhs
        agree[lhs] += 1
    assert agree[True] > 20 and agree[False] > 20


def test_geodesic_homothety_shift():
    rng = random.Random(13)
    for _ in range(25):
        n = rng.randint(2, 4)
        p = rng.choice([2, 3, 5])
        ctx = ValuationContext(p)
        r = rng.randint(1, n - 1)
        while True:
            F = M([[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)])
            if determinant(F) != 0:
                break
        W, W2 = Subspace(F.select_columns(range(r))), Subspace(F.select_columns(range(r, n)))
        Mw, Mw2 = Lattice(W.basis, ctx), Lattice(W2.basis, ctx)
        a, b = rng.randint(-3, 3), rng.randint(-3, 3)
        g = geodesic_between(W, W2, Mw, Mw2)
        h = geodesic_between(W, W2, Mw.scaled(a), Mw2.scaled(b))
        for k in range(-3, 4):
            assert h.vertex(k) == g.vertex(k + b - a)
            assert adjacent(g.vertex(k), g.vertex(k + 1))


def test_geodesic_injectivity():
    rng = random.Random(17)
    for _ in range(25):
        n = rng.randint(2, 4)
        p = rng.choice([2, 3, 5])
        ctx = ValuationContext(p)
        r = rng.randint(1, n - 1)
        while True:
            F = M([[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)])
            if determinant(F) != 0:
                break
        W, W2 = Subspace(F.select_columns(range(r))), Subspace(F.select_columns(range(r, n)))
        Mw, Mw2 = Lattice(W.basis, ctx), Lattice(W2.basis, ctx)
        # change M_w inside W by a non-scalar element of GL_r(Q)
        while True:
            T = M([[rng.randint(-3, 3) for _ in range(r)] for _ in range(r)])
            if determinant(T) != 0:
                break
        Mw_alt = Lattice(W.basis @ T, ctx)
        if lattice_class(Mw_alt) == lattice_class(Mw):
            continue
        g = geodesic_between(W, W2, Mw, Mw2)
        h = geodesic_between(W, W2, Mw_alt, Mw2)
        assert set(g.vertices(-6, 6)) != set(h.vertices(-6, 6))
