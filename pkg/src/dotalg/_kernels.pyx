# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: modular, Boolean and tropical matrix products, and exact treewidth."""

from libc.stdint cimport int64_t, uint64_t, int8_t
from libc.stdlib cimport malloc, free

cdef extern from *:
    """
    static inline unsigned long long dotalg_mulmod(unsigned long long a, unsigned long long b,
                                                   unsigned long long p) {
        return (unsigned long long)(((unsigned __int128)a * b) % p);
    }
    static inline int dotalg_popcount(unsigned long long x) { return __builtin_popcountll(x); }
    """
    unsigned long long dotalg_mulmod(unsigned long long a, unsigned long long b, unsigned long long p)
    int dotalg_popcount(unsigned long long x)


cdef uint64_t* _u64(seq, Py_ssize_t size) except NULL:
    cdef uint64_t* buf = <uint64_t*> malloc(max(size, 1) * sizeof(uint64_t))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    for i in range(size):
        buf[i] = seq[i]
    return buf


cdef int64_t* _i64(seq, Py_ssize_t size) except NULL:
    cdef int64_t* buf = <int64_t*> malloc(max(size, 1) * sizeof(int64_t))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    for i in range(size):
        buf[i] = seq[i]
    return buf


def matmul_mod(a, b, Py_ssize_t n, Py_ssize_t k, Py_ssize_t m, unsigned long long p):
    cdef uint64_t* A = _u64(a, n * k)
    cdef uint64_t* B = _u64(b, k * m)
    cdef uint64_t* acc = <uint64_t*> malloc(max(m, 1) * sizeof(uint64_t))
    cdef Py_ssize_t i, t, j
    cdef uint64_t x, s
    out = [0] * (n * m)
    try:
        for i in range(n):
            for j in range(m):
                acc[j] = 0
            for t in range(k):
                x = A[i * k + t]
                if x:
                    for j in range(m):
                        s = acc[j] + dotalg_mulmod(x, B[t * m + j], p)
                        acc[j] = s - p if s >= p else s
            for j in range(m):
                out[i * m + j] = acc[j]
    finally:
        free(A); free(B); free(acc)
    return out


def kron_mod(a, b, Py_ssize_t ar, Py_ssize_t ac, Py_ssize_t br, Py_ssize_t bc, unsigned long long p):
    cdef uint64_t* A = _u64(a, ar * ac)
    cdef uint64_t* B = _u64(b, br * bc)
    cdef Py_ssize_t i, j, r, c, cols = ac * bc
    cdef uint64_t x
    out = [0] * (ar * br * cols)
    try:
        for i in range(ar):
            for j in range(ac):
                x = A[i * ac + j]
                if x:
                    for r in range(br):
                        for c in range(bc):
                            out[(i * br + r) * cols + j * bc + c] = dotalg_mulmod(x, B[r * bc + c], p)
    finally:
        free(A); free(B)
    return out


def matmul_bool(a, b, Py_ssize_t n, Py_ssize_t k, Py_ssize_t m):
    cdef int64_t* A = _i64(a, n * k)
    cdef int64_t* B = _i64(b, k * m)
    cdef int8_t* acc = <int8_t*> malloc(max(m, 1))
    cdef Py_ssize_t i, t, j
    out = [0] * (n * m)
    try:
        for i in range(n):
            for j in range(m):
                acc[j] = 0
            for t in range(k):
                if A[i * k + t]:
                    for j in range(m):
                        if B[t * m + j]:
                            acc[j] = 1
            for j in range(m):
                out[i * m + j] = acc[j]
    finally:
        free(A); free(B); free(acc)
    return out


def kron_bool(a, b, Py_ssize_t ar, Py_ssize_t ac, Py_ssize_t br, Py_ssize_t bc):
    cdef int64_t* A = _i64(a, ar * ac)
    cdef int64_t* B = _i64(b, br * bc)
    cdef Py_ssize_t i, j, r, c, cols = ac * bc
    out = [0] * (ar * br * cols)
    try:
        for i in range(ar):
            for j in range(ac):
                if A[i * ac + j]:
                    for r in range(br):
                        for c in range(bc):
                            if B[r * bc + c]:
                                out[(i * br + r) * cols + j * bc + c] = 1
    finally:
        free(A); free(B)
    return out


def matmul_trop(a, b, Py_ssize_t n, Py_ssize_t k, Py_ssize_t m):
    cdef int64_t* A = _i64(a, n * k)
    cdef int64_t* B = _i64(b, k * m)
    cdef int64_t* acc = <int64_t*> malloc(max(m, 1) * sizeof(int64_t))
    cdef Py_ssize_t i, t, j
    cdef int64_t x, y, s
    out = [0] * (n * m)
    try:
        for i in range(n):
            for j in range(m):
                acc[j] = -1
            for t in range(k):
                x = A[i * k + t]
                if x < 0:
                    continue
                for j in range(m):
                    y = B[t * m + j]
                    if y >= 0:
                        s = x + y
                        if acc[j] < 0 or s < acc[j]:
                            acc[j] = s
            for j in range(m):
                out[i * m + j] = acc[j]
    finally:
        free(A); free(B); free(acc)
    return out


def kron_trop(a, b, Py_ssize_t ar, Py_ssize_t ac, Py_ssize_t br, Py_ssize_t bc):
    cdef int64_t* A = _i64(a, ar * ac)
    cdef int64_t* B = _i64(b, br * bc)
    cdef Py_ssize_t i, j, r, c, cols = ac * bc
    cdef int64_t x, y
    out = [-1] * (ar * br * cols)
    try:
        for i in range(ar):
            for j in range(ac):
                x = A[i * ac + j]
                if x >= 0:
                    for r in range(br):
                        for c in range(bc):
                            y = B[r * bc + c]
                            if y >= 0:
                                out[(i * br + r) * cols + j * bc + c] = x + y
    finally:
        free(A); free(B)
    return out


cdef inline unsigned long long _outside(unsigned long long* adj, unsigned long long s, int v):
    cdef unsigned long long inside = s | (1ULL << v)
    cdef unsigned long long seen = 1ULL << v
    cdef unsigned long long frontier = seen, nb, f, boundary = 0
    cdef int u
    while frontier:
        nb = 0
        f = frontier
        while f:
            u = __builtin_ctzll(f)
            nb |= adj[u]
            f &= f - 1
        boundary |= nb & ~inside
        frontier = nb & s & ~seen
        seen |= frontier
    return boundary


cdef extern from *:
    int __builtin_ctzll(unsigned long long)


def treewidth_dp(int n, adj):
    """Exact treewidth by dynamic programming over vertex subsets (n <= 24)."""
    if n == 0:
        return -1, []
    cdef unsigned long long full = (1ULL << n) - 1
    cdef unsigned long long size = full + 1
    cdef int8_t* tw = <int8_t*> malloc(size)
    cdef int8_t* choice = <int8_t*> malloc(size)
    cdef unsigned long long adjc[64]
    cdef unsigned long long s, rest, low, prev
    cdef int v, best, val, q, i
    if tw == NULL or choice == NULL:
        free(tw); free(choice)
        raise MemoryError()
    for i in range(n):
        adjc[i] = adj[i]
    tw[0] = -1
    try:
        for s in range(1, size):
            best = n + 1
            rest = s
            while rest:
                v = __builtin_ctzll(rest)
                low = 1ULL << v
                rest &= rest - 1
                prev = s ^ low
                val = tw[prev]
                if val >= best:
                    continue
                q = dotalg_popcount(_outside(adjc, prev, v))
                if q > val:
                    val = q
                if val < best:
                    best = val
                    choice[s] = v
            tw[s] = best
        order = []
        s = full
        while s:
            v = choice[s]
            order.append(v)
            s ^= 1ULL << v
        order.reverse()
        width = tw[full] if tw[full] > 0 else 0
    finally:
        free(tw); free(choice)
    return width, order
