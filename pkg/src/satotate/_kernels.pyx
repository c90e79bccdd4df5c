# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled trace-sum kernels.

All field arithmetic goes through lookup tables built by :mod:`satotate.ffield`:
``shift[a, x]`` is the index of ``x - a``, ``mul[u, v]`` the index of ``u * v``
and ``chi[v]`` the quadratic character.  Loops run without the GIL so chunk
workers on separate threads execute concurrently.
"""

import numpy as np
from libc.stdint cimport int8_t, int32_t, int64_t
from libc.stdlib cimport malloc, free


cdef inline int64_t _trace(const int32_t* a, int n, int q,
                           const int32_t[:, ::1] shift,
                           const int32_t[:, ::1] mul,
                           const int8_t[::1] chi) noexcept nogil:
    cdef int64_t s = 0
    cdef int x, i, acc
    for x in range(q):
        acc = shift[a[0], x]
        for i in range(1, n):
            acc = mul[acc, shift[a[i], x]]
        s += chi[acc]
    return -s


def trace_values(const int32_t[:, ::1] tuples,
                 const int32_t[:, ::1] shift,
                 const int32_t[:, ::1] mul,
                 const int8_t[::1] chi):
    """T_a = -sum_x chi(prod_i (x - a_i)) for each row a of ``tuples``."""
    cdef Py_ssize_t N = tuples.shape[0], t
    cdef int n = tuples.shape[1]
    cdef int q = chi.shape[0]
    out = np.empty(N, dtype=np.int64)
    cdef int64_t[::1] o = out
    with nogil:
        for t in range(N):
            o[t] = _trace(&tuples[t, 0], n, q, shift, mul, chi)
    return out


cdef int _unrank(int64_t rank, int q, int n, int32_t* a, char* used) noexcept nogil:
    cdef int i, j, d, v
    cdef int64_t radix = 1
    for i in range(1, n):
        radix *= q - i
    for i in range(q):
        used[i] = 0
    for i in range(n):
        d = <int>(rank // radix)
        rank = rank % radix
        if i < n - 1:
            radix = radix // (q - i - 1)
        v = -1
        j = -1
        while j < d:
            v += 1
            if not used[v]:
                j += 1
        a[i] = v
        used[v] = 1
    return 0


cdef bint _advance(int q, int n, int32_t* a, char* used) noexcept nogil:
    """Step to the lexicographic successor among injective tuples."""
    cdef int i = n - 1, j, v
    while i >= 0:
        used[a[i]] = 0
        v = a[i] + 1
        while v < q and used[v]:
            v += 1
        if v < q:
            a[i] = v
            used[v] = 1
            for j in range(i + 1, n):
                v = 0
                while used[v]:
                    v += 1
                a[j] = v
                used[v] = 1
            return True
        i -= 1
    return False


def unrank(const int64_t[::1] ranks, int q, int n):
    """Injective n-tuples over range(q) with the given lexicographic ranks."""
    cdef Py_ssize_t N = ranks.shape[0], t
    out = np.empty((N, n), dtype=np.int32)
    cdef int32_t[:, ::1] o = out
    cdef char* used = <char*> malloc(q)
    if used == NULL:
        raise MemoryError()
    try:
        with nogil:
            for t in range(N):
                _unrank(ranks[t], q, n, &o[t, 0], used)
    finally:
        free(used)
    return out


def trace_counts(int64_t start, int64_t count, int n,
                 const int32_t[:, ::1] shift,
                 const int32_t[:, ::1] mul,
                 const int8_t[::1] chi):
    """Histogram of T over the ranked range [start, start + count) of R_n.

    Returns int64 counts of length 2q + 1; entry T + q counts tuples with trace T.
    """
    cdef int q = chi.shape[0]
    counts = np.zeros(2 * q + 1, dtype=np.int64)
    if count <= 0:
        return counts
    cdef int64_t[::1] c = counts
    cdef int32_t* a = <int32_t*> malloc(n * sizeof(int32_t))
    cdef char* used = <char*> malloc(q)
    cdef int64_t k
    if a == NULL or used == NULL:
        free(a)
        free(used)
        raise MemoryError()
    try:
        with nogil:
            _unrank(start, q, n, a, used)
            for k in range(count):
                c[_trace(a, n, q, shift, mul, chi) + q] += 1
                if k + 1 < count:
                    _advance(q, n, a, used)
    finally:
        free(a)
        free(used)
    return counts
