# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Bit-compatible mirror of ``_pykernels``.

Every function keeps the exact floating-point operation order and
integer arithmetic of the pure-Python reference so the two
implementations are interchangeable down to the last bit.
"""

import array as _array

from cpython cimport array
from libc.math cimport floor as c_floor
from libc.math cimport isfinite as c_isfinite
from libc.math cimport pow as c_pow
from libc.stdlib cimport free, malloc

IMPL = "c"

TIE_NEGATIVES_FIRST = 0
TIE_POSITIVES_FIRST = 1
TIE_ORIGINAL_ORDER = 2

cdef array.array _TMPL_Q = _array.array("q")
cdef array.array _TMPL_D = _array.array("d")
cdef array.array _TMPL_I = _array.array("i")

cdef unsigned long long _GAMMA = 0x9E3779B97F4A7C15


def count_labels(const int[::1] flat, Py_ssize_t n_classes):
    cdef array.array out = array.clone(_TMPL_Q, n_classes, True)
    cdef long long[::1] counts = out
    cdef Py_ssize_t i
    for i in range(flat.shape[0]):
        counts[flat[i]] += 1
    return out


def example_weights(const int[::1] flat, const long long[::1] offsets,
                    const double[::1] priors, double beta):
    cdef Py_ssize_t n = offsets.shape[0] - 1
    cdef array.array out = array.clone(_TMPL_D, n, False)
    cdef double[::1] w = out
    cdef Py_ssize_t j, i
    cdef long long lo, hi, n_unlabeled = 0
    cdef double best, v
    for j in range(n):
        lo = offsets[j]
        hi = offsets[j + 1]
        if hi == lo:
            w[j] = 1.0
            n_unlabeled += 1
            continue
        best = 0.0
        for i in range(lo, hi):
            v = c_pow(1.0 / priors[flat[i]], beta)
            if v > best:
                best = v
        w[j] = best
    return out, n_unlabeled


def round_factors(const double[::1] weights, double wmin):
    cdef Py_ssize_t n = weights.shape[0]
    cdef array.array out = array.clone(_TMPL_Q, n, False)
    cdef long long[::1] f = out
    cdef Py_ssize_t j
    for j in range(n):
        f[j] = <long long>c_floor(weights[j] / wmin + 0.5)
    return out


def weighted_counts(const int[::1] flat, const long long[::1] offsets,
                    const long long[::1] factors, Py_ssize_t n_classes):
    cdef array.array out = array.clone(_TMPL_Q, n_classes, True)
    cdef long long[::1] counts = out
    cdef Py_ssize_t j, i
    cdef long long f
    for j in range(offsets.shape[0] - 1):
        f = factors[j]
        for i in range(offsets[j], offsets[j + 1]):
            counts[flat[i]] += f
    return out


def count_nonfinite(const double[::1] values):
    cdef Py_ssize_t i
    cdef long long bad = 0
    for i in range(values.shape[0]):
        if not c_isfinite(values[i]):
            bad += 1
    return bad


def expand_indices(const long long[::1] factors, Py_ssize_t total):
    cdef array.array out = array.clone(_TMPL_I, total, False)
    cdef int[::1] idx = out
    cdef Py_ssize_t j, pos = 0
    cdef long long r
    for j in range(factors.shape[0]):
        for r in range(factors[j]):
            idx[pos] = <int>j
            pos += 1
    return out


cdef inline unsigned long long _mix64(unsigned long long z) noexcept nogil:
    z = (z ^ (z >> 30)) * <unsigned long long>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <unsigned long long>0x94D049BB133111EB
    return z ^ (z >> 31)


def shuffle_in_place(int[::1] indices, unsigned long long seed):
    cdef unsigned long long state = seed
    cdef Py_ssize_t i
    cdef unsigned long long j
    cdef int tmp
    for i in range(indices.shape[0] - 1, 0, -1):
        state = state + _GAMMA
        j = _mix64(state) % <unsigned long long>(i + 1)
        tmp = indices[i]
        indices[i] = indices[j]
        indices[j] = tmp


cdef inline bint _less(int a, int b, const double* s,
                       const unsigned char* p, int tie) noexcept nogil:
    if s[a] != s[b]:
        return s[a] > s[b]
    if tie == 0:
        if p[a] != p[b]:
            return p[a] < p[b]
    elif tie == 1:
        if p[a] != p[b]:
            return p[a] > p[b]
    return a < b


cdef void _sort_order(int* idx, int* tmp, Py_ssize_t n, const double* s,
                      const unsigned char* p, int tie) noexcept nogil:
    # Bottom-up merge sort; the comparator is a strict total order, so
    # the result is unique regardless of algorithm.
    cdef Py_ssize_t width = 1, lo, mid, hi, l, r, i
    cdef int* src = idx
    cdef int* dst = tmp
    cdef int* swap
    while width < n:
        lo = 0
        while lo < n:
            mid = lo + width
            if mid > n:
                mid = n
            hi = lo + 2 * width
            if hi > n:
                hi = n
            l = lo
            r = mid
            i = lo
            while l < mid and r < hi:
                if _less(src[r], src[l], s, p, tie):
                    dst[i] = src[r]
                    r += 1
                else:
                    dst[i] = src[l]
                    l += 1
                i += 1
            while l < mid:
                dst[i] = src[l]
                l += 1
                i += 1
            while r < hi:
                dst[i] = src[r]
                r += 1
                i += 1
            lo = hi
        swap = src
        src = dst
        dst = swap
        width *= 2
    if src != idx:
        for i in range(n):
            idx[i] = src[i]


def rank_metrics(const double[::1] scores, const unsigned char[::1] pos,
                 int tie_mode):
    cdef Py_ssize_t n = scores.shape[0]
    cdef int* idx = <int*>malloc(n * sizeof(int))
    cdef int* tmp = <int*>malloc(n * sizeof(int))
    if idx == NULL or tmp == NULL:
        free(idx)
        free(tmp)
        raise MemoryError
    cdef Py_ssize_t r, i, j
    cdef long long n_pos = 0, two_r = 0, group_pos, two_u
    cdef double ap_sum = 0.0, ap, auc, s
    try:
        for i in range(n):
            idx[i] = <int>i
        _sort_order(idx, tmp, n, &scores[0], &pos[0], tie_mode)

        for r in range(n):
            if pos[idx[r]]:
                n_pos += 1
                ap_sum += <double>n_pos / <double>(r + 1)
        ap = ap_sum / <double>n_pos

        i = 0
        while i < n:
            j = i
            s = scores[idx[i]]
            group_pos = pos[idx[i]]
            while j + 1 < n and scores[idx[j + 1]] == s:
                j += 1
                group_pos += pos[idx[j]]
            two_r += group_pos * <long long>(2 * n - i - j)
            i = j + 1
        two_u = two_r - n_pos * (n_pos + 1)
        auc = <double>two_u / <double>(2 * n_pos * (<long long>n - n_pos))
    finally:
        free(idx)
        free(tmp)
    return ap, auc
