import numpy as np
import pytest

from localheights import generators
from localheights.building import Lattice, Subspace, adjacent, combinatorial_distance
from localheights.exact import RationalMatrix, ValuationContext
from localheights.nonarch import (
    CycleQuadruple,
    HypothesesFailed,
    ImproperIntersection,
    LatticesNotEquivalent,
    NotSpanning,
    build_geodesic,
    construct_complements,
    distor,
    find_compatible_lattices,
    gate_index,
    gate_vertex_constructive,
    gate_window,
    intersection_algebraic,
    intersection_geometric,
    intersection_geometric_details,
    scalar_valuations,
    gate_data,
)

S = Subspace.from_vectors


def example(p):
    return generators.nonarch_example(p)


@pytest.mark.parametrize("prime", [2, 3, 5, 13])
def test_example_value(prime):
    inst = example(prime)
    q = inst.quad
    assert intersection_algebraic(q) == -1
    res = intersection_geometric_details(q, inst.L_A, inst.L_B)
    assert res.value == -1
    assert (res.k_A, res.k_B) == (0, 1)
    assert res.constructive_agrees
    assert intersection_geometric(q) == -1


def test_example_swaps():
    q = example(5).quad
    assert intersection_algebraic(q.swap_ab()) == 1
    assert intersection_algebraic(q.swap_cd()) == 1
    assert intersection_geometric(q.swap_ab()) == 1
    assert intersection_geometric(q.swap_cd()) == 1


def test_scalar_valuations_example():
    inst = example(5)
    q = inst.quad
    Cp, Dp = construct_complements(q)
    assert scalar_valuations(q, Cp, Dp, inst.L_A, inst.L_B) == (0, 1)
    ctx = q.ctx
    L_B = Lattice(q.A.basis.scale(5), ctx)
    qa = CycleQuadruple(q.A, q.A, q.C, q.D, ctx)
    assert scalar_valuations(qa, Cp, Dp, inst.L_A, L_B) == (1, 1)


def test_constructive_gates_example():
    inst = example(3)
    q = inst.quad
    data = gate_data(q, inst.L_A, inst.L_B)
    gamma = build_geodesic(q, data)
    gA = gate_vertex_constructive(q, data, "A", gamma)
    gB = gate_vertex_constructive(q, data, "B", gamma)
    assert adjacent(gA, gB)
    assert distor(gamma, gA, gB) == -1
    assert distor(gamma, gB, gA) == 1
    assert distor(gamma, gA, gA) == 0
    w = gate_window(q, data)
    assert gate_index(gamma, q.A, w) == 0
    assert gate_index(gamma, q.B, w) == 1


def test_gate_index_window_too_small():
    from localheights.nonarch import GateNotFound

    inst = example(3)
    data = gate_data(inst.quad, inst.L_A, inst.L_B)
    gamma = build_geodesic(inst.quad, data)
    with pytest.raises(GateNotFound):
        gate_index(gamma, inst.quad.B, (3, 6))


def test_degenerate_equal_subspaces():
    q = CycleQuadruple(S([1, 1]), S([2, 2]), S([1, 0]), S([0, 1]), ValuationContext(3))
    assert intersection_algebraic(q) == 0
    res = intersection_geometric_details(q)
    assert res.value == 0 and res.degenerate == "A = B"


def test_not_spanning():
    ctx = ValuationContext(3)
    e = lambda *v: RationalMatrix.from_columns(v, 3)
    q = CycleQuadruple(
        Subspace(e([0, 0, 1])), Subspace(e([0, 1, 1])), Subspace(e([1, 0, 0], [0, 1, 0])), Subspace(e([1, 0, 0], [1, 1, 0])), ctx
    )
    with pytest.raises(NotSpanning) as err:
        intersection_geometric(q)
    assert err.value.condition == "spanning"


def test_improper():
    q = CycleQuadruple(S([1, 0]), S([1, 1]), S([1, 0]), S([0, 1]), ValuationContext(5))
    assert q.improper_pairs() == ["AC"]
    with pytest.raises(ImproperIntersection):
        intersection_algebraic(q)
    with pytest.raises(ImproperIntersection):
        intersection_geometric(q)


def test_dimension_validation():
    with pytest.raises(ValueError):
        CycleQuadruple(S([1, 0]), S([1, 1, 0]), S([1, 0]), S([0, 1]), ValuationContext(5))


def test_complements_none_when_ab_contains_c_cap_d():
    # <A,B> contains C∩D, so its traces on C and D overlap and cannot split
    ctx = ValuationContext(3)
    E = lambda *cols: Subspace(RationalMatrix.from_columns(cols, 5))
    C = E([1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 0, 0, 1])
    D = E([0, 0, 1, 0, 0], [0, 0, 0, 1, 0], [0, 0, 0, 0, 1])
    A = E([1, 0, 1, 0, 0], [0, 1, 0, 1, 1])
    B = E([1, 0, 2, 0, 1], [0, 1, 0, 1, -1])
    q = CycleQuadruple(A, B, C, D, ctx)
    assert not q.improper_pairs()
    assert construct_complements(q) is None
    with pytest.raises(HypothesesFailed) as err:
        intersection_geometric(q)
    assert err.value.condition == "complements"


def test_incompatible_lattices():
    inst = generators.nonarch_adapted(np.random.default_rng(1), 4, 2, 3, conjugate=False)
    q = inst.quad
    Cp, Dp = construct_complements(q)
    bad = Lattice(inst.L_B.basis @ RationalMatrix([[1, 0], [0, 3]]), q.ctx)
    with pytest.raises(LatticesNotEquivalent):
        scalar_valuations(q, Cp, Dp, inst.L_A, bad)


def test_compatible_lattices_search():
    rng = np.random.default_rng(7)
    for _ in range(15):
        n = int(rng.integers(2, 6))
        p = int(rng.integers(1, n // 2 + 1))
        inst = generators.nonarch_adapted(rng, n, p, int(rng.choice([2, 3, 5])))
        q = inst.quad
        Cp, Dp = construct_complements(q)
        L_A, L_B = find_compatible_lattices(q, Cp, Dp)
        a, b = scalar_valuations(q, Cp, Dp, L_A, L_B)
        assert p * (a - b) == inst.expected


@pytest.mark.parametrize("seed", range(6))
def test_generated_agreement(seed):
    rng = np.random.default_rng([17, seed])
    for _ in range(8):
        n = int(rng.integers(2, 7))
        p = int(rng.integers(1, n // 2 + 1))
        prime = int(rng.choice([2, 3, 5, 13]))
        inst = generators.nonarch_adapted(rng, n, p, prime)
        q = inst.quad
        assert intersection_algebraic(q) == inst.expected
        res = intersection_geometric_details(q, inst.L_A, inst.L_B)
        assert res.value == inst.expected
        if res.degenerate:
            assert q.A.same_as(q.B)
            continue
        assert res.constructive_agrees
        assert combinatorial_distance(res.gate_A, res.gate_B) == abs(res.distor)


def test_lattice_and_basis_invariance():
    rng = np.random.default_rng(23)
    for _ in range(12):
        n = int(rng.integers(2, 6))
        p = int(rng.integers(1, n // 2 + 1))
        prime = int(rng.choice([2, 3, 5]))
        inst = generators.nonarch_adapted(rng, n, p, prime)
        q, ctx = inst.quad, inst.quad.ctx
        j = int(rng.integers(-2, 3))
        L_A, L_B = inst.L_A.scaled(j), inst.L_B.scaled(j)
        assert intersection_geometric(q, L_A, L_B) == inst.expected
        U = generators.random_gl_local(rng, p, prime)
        assert intersection_geometric(q, Lattice(inst.L_A.basis @ U, ctx), inst.L_B) == inst.expected
        T = lambda d: generators.random_invertible(rng, d, 2)
        q2 = CycleQuadruple(
            Subspace(q.A.basis @ T(p)), Subspace(q.B.basis @ T(p)), Subspace(q.C.basis @ T(n - p)), Subspace(q.D.basis @ T(n - p)), ctx
        )
        assert intersection_algebraic(q2) == inst.expected
        assert intersection_geometric(q2) == inst.expected


def test_degenerate_p1_family():
    rng = np.random.default_rng(31)
    for _ in range(10):
        n = int(rng.integers(3, 7))
        inst = generators.nonarch_degenerate_p1(rng, n, int(rng.choice([2, 3, 5, 13])))
        assert intersection_algebraic(inst.quad) == 0
        assert intersection_geometric(inst.quad) == 0


def test_p1_coefficient_is_one():
    # for lines the value is the oriented gate distance itself
    rng = np.random.default_rng(37)
    for _ in range(10):
        n = int(rng.integers(2, 6))
        inst = generators.nonarch_adapted(rng, n, 1, int(rng.choice([2, 3, 5])))
        res = intersection_geometric_details(inst.quad, inst.L_A, inst.L_B)
        if res.degenerate:
            continue
        assert res.value == res.distor == inst.alpha_val - inst.beta_val
