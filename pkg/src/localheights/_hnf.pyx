# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled column Hermite form over Z_(p) modulo p^e.

Same contract as ``_hnf_py.hnf_mod``; requires p^e < 2^62.
"""

from libc.stdlib cimport malloc, free

cdef extern from *:
    ctypedef long long i128 "__int128"

ctypedef long long i64

LIMIT = 1 << 62


cdef inline i64 mulmod(i64 a, i64 b, i64 m) nogil:
    return <i64>((<i128>a * <i128>b) % <i128>m)


cdef inline i64 modp(i64 a, i64 m) nogil:
    a = a % m
    if a < 0:
        a += m
    return a


cdef i64 inv_mod(i64 a, i64 m) nogil:
    cdef i64 t = 0, newt = 1, r = m, newr = a, q, tmp
    while newr != 0:
        q = r // newr
        tmp = t - q * newt
        t = newt
        newt = tmp
        tmp = r - q * newr
        r = newr
        newr = tmp
    if t < 0:
        t += m
    return t


cdef inline int val(i64 x, i64 p, int e) nogil:
    cdef int v = 0
    if x == 0:
        return e
    while x % p == 0:
        x = x // p
        v += 1
    return v


def hnf_mod(cols, int n, long long p, int e):
    cdef i64 P = 1
    cdef int i, j, k, a, best_v, best_j, v, ncols, nwork
    cdef i64 x, f, pa, unit, inv
    for i in range(e):
        P *= p
        if P >= LIMIT:
            raise OverflowError("modulus too large for the compiled kernel")
    ncols = len(cols)
    cdef i64 *W = <i64 *> malloc(ncols * n * sizeof(i64))
    cdef i64 *H = <i64 *> malloc(n * n * sizeof(i64))
    cdef int *alive = <int *> malloc(ncols * sizeof(int))
    cdef int *ex = <int *> malloc(n * sizeof(int))
    cdef i64 *pw = <i64 *> malloc((e + 1) * sizeof(i64))
    if W == NULL or H == NULL or alive == NULL or ex == NULL or pw == NULL:
        free(W); free(H); free(alive); free(ex); free(pw)
        raise MemoryError()
    try:
        pw[0] = 1
        for i in range(1, e + 1):
            pw[i] = pw[i - 1] * p
        for j in range(ncols):
            c = cols[j]
            alive[j] = 1
            for k in range(n):
                W[j * n + k] = modp(<i64>(c[k] % P), P)
        for i in range(n):
            best_v = e
            best_j = -1
            for j in range(ncols):
                if not alive[j]:
                    continue
                v = val(W[j * n + i], p, e)
                if v < best_v:
                    best_v = v
                    best_j = j
                    if v == 0:
                        break
            if best_j < 0:
                raise ValueError("lattice does not contain p^(e-1) Z^n")
            a = best_v
            alive[best_j] = 0
            pa = pw[a]
            unit = W[best_j * n + i] // pa
            inv = inv_mod(unit % P, P)
            for k in range(i):
                H[i * n + k] = 0
            for k in range(i, n):
                H[i * n + k] = mulmod(W[best_j * n + k], inv, P)
            H[i * n + i] = pa
            ex[i] = a
            for j in range(ncols):
                if not alive[j]:
                    continue
                x = W[j * n + i]
                if x != 0:
                    f = x // pa
                    for k in range(i, n):
                        W[j * n + k] = modp(W[j * n + k] - mulmod(f, H[i * n + k], P), P)
        # H[j*n + k]: column j (pivot row j), row k
        for i in range(n):
            pa = pw[ex[i]]
            for j in range(i):
                x = H[j * n + i]
                if x >= pa:
                    f = x // pa
                    for k in range(i + 1, n):
                        H[j * n + k] = modp(H[j * n + k] - mulmod(f, H[i * n + k], P), P)
                    H[j * n + i] = x - f * pa
        rows = [[H[j * n + i] for j in range(n)] for i in range(n)]
        exps = [ex[i] for i in range(n)]
    finally:
        free(W); free(H); free(alive); free(ex); free(pw)
    return rows, exps
