import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localheights import kernels
from localheights.building import hermite_form, hermite_generic, residue_mod
from localheights.exact import ValuationContext, rank, smith_local
from strategies import PRIMES, rational_matrices

compiled = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernel not built")


def _case(rng, n, p, e):
    P = p**e
    cols = [[rng.randrange(P) for _ in range(n)] for _ in range(rng.randint(0, n + 2))]
    cols += [[p ** (e - 1) if i == j else 0 for i in range(n)] for j in range(n)]
    rng.shuffle(cols)
    return cols, n, p, e


@compiled
def test_compiled_matches_python():
    rng = random.Random(7)
    for _ in range(2000):
        n = rng.randint(1, 6)
        p = rng.choice([2, 3, 5, 13])
        e = rng.randint(1, 8)
        c = _case(rng, n, p, e)
        assert kernels.hnf_mod_compiled(*c) == kernels.hnf_mod_python(*c)


@compiled
def test_compiled_rejects_large_modulus():
    with pytest.raises(OverflowError):
        kernels.hnf_mod_compiled([[1]], 1, 2, 70)
    # the dispatcher falls back to Python for such moduli
    assert kernels.hnf_mod([[1]], 1, 2, 70) == ([[1]], [0])


def test_kernel_output_shape():
    rows, exps = kernels.hnf_mod([[4, 2], [0, 8]], 2, 2, 4)
    for i, a in enumerate(exps):
        assert rows[i][i] == 2**a
        assert all(rows[i][j] == 0 for j in range(i + 1, 2))
        assert all(0 <= rows[i][j] < 2**a for j in range(i))


def test_missing_pivot_raises():
    with pytest.raises(ValueError):
        kernels.hnf_mod_python([[1, 0]], 2, 3, 2)


def test_residue_mod():
    ctx = ValuationContext(3)
    from fractions import Fraction as F

    assert residue_mod(F(10), 2, ctx) == 1
    assert residue_mod(F(1, 2), 1, ctx) == 2
    assert residue_mod(F(1, 3), 1, ctx) == F(1, 3)
    assert residue_mod(F(27), 2, ctx) == 0
    r = residue_mod(F(5, 9), 0, ctx)
    assert 0 <= r < 1 and (F(5, 9) - r) == int(F(5, 9) - r)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_kernel_and_generic_hermite_agree(data):
    p = data.draw(PRIMES)
    A = data.draw(rational_matrices(p, rows=(1, 5), cols=(1, 7)))
    if rank(A) < A.nrows:
        return
    ctx = ValuationContext(p)
    H = hermite_form(A, ctx)
    assert H == hermite_generic(A, ctx)
    # same module: H = A * (integral, unit-determinant change)
    S = smith_local(A, ctx)
    assert sorted(smith_local(H, ctx).exponents) == sorted(S.exponents)
