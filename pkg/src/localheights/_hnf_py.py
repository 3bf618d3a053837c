"""Pure-Python column Hermite form over Z_(p), computed modulo p^e.

Mirror of ``_hnf.pyx``; used when the compiled module is unavailable or the
modulus does not fit in 64 bits.
"""


def _val(x, p, e):
    if x == 0:
        return e
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def hnf_mod(cols, n, p, e):
    """Column Hermite form of the lattice generated by ``cols`` in Z_(p)^n.

    ``cols`` is a list of integer columns (length n each). The caller
    guarantees the lattice contains p^(e-1) Z^n, so every row gets a pivot
    of exponent < e. Returns (rows, exponents): an n x n lower-triangular
    integer matrix with pivots p^a_i on the diagonal and every entry left of
    a pivot reduced into [0, p^a_i).
    """
    P = p**e
    work = [[x % P for x in c] for c in cols]
    out = []
    exps = []
    for i in range(n):
        best = None
        for j, c in enumerate(work):
            v = _val(c[i], p, e)
            if best is None or v < best[0]:
                best = (v, j)
                if v == 0:
                    break
        if best is None or best[0] >= e:
            raise ValueError("lattice does not contain p^(e-1) Z^n")
        a, j = best
        piv = work.pop(j)
        unit = piv[i] // p**a
        inv = pow(unit, -1, P)
        piv = [(x * inv) % P for x in piv]
        pa = p**a
        for c in work:
            x = c[i]
            if x:
                f = x // pa
                for k in range(i, n):
                    c[k] = (c[k] - f * piv[k]) % P
        piv[i] = pa
        out.append(piv)
        exps.append(a)
    # out[j] is the column with pivot in row j; reduce left of each pivot
    for i in range(n):
        pa = p ** exps[i]
        col_i = out[i]
        for j in range(i):
            col_j = out[j]
            x = col_j[i]
            if x >= pa:
                f = x // pa
                for k in range(i, n):
                    col_j[k] = col_j[k] - f * col_i[k]
                col_j[i] = x - f * pa
        # entries below row i may have left [0, P); fold them back
        for j in range(i + 1):
            col = out[j]
            for k in range(i + 1, n):
                col[k] %= P
    rows = [[out[j][i] for j in range(n)] for i in range(n)]
    return rows, exps
