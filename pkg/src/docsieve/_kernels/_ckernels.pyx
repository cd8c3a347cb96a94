# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Semantics must match _pykernels exactly (bit-identical)."""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef uint64_t FNV_OFFSET = 0xCBF29CE484222325ULL
cdef uint64_t FNV_PRIME = 0x100000001B3ULL


cdef inline uint64_t _fnv1a64(const unsigned char* data, Py_ssize_t n) noexcept nogil:
    cdef uint64_t h = FNV_OFFSET
    cdef Py_ssize_t i
    for i in range(n):
        h ^= data[i]
        h *= FNV_PRIME
    return h


def fnv1a64(bytes data):
    """64-bit FNV-1a hash."""
    return _fnv1a64(<const unsigned char*> data, len(data))


cdef inline uint64_t _fnv1a64_prefixed(const unsigned char* data, Py_ssize_t n) noexcept nogil:
    # Equivalent to hashing b"w:" + data without building the concatenation.
    cdef uint64_t h = FNV_OFFSET
    cdef Py_ssize_t i
    h ^= 0x77  # 'w'
    h *= FNV_PRIME
    h ^= 0x3A  # ':'
    h *= FNV_PRIME
    for i in range(n):
        h ^= data[i]
        h *= FNV_PRIME
    return h


def fold_features(list token_bytes, bytes text_bytes, list offsets, int dims):
    """Signed feature hashing of word unigrams and character trigrams."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vec = np.zeros(dims, dtype=np.float64)
    cdef double* v = <double*> cnp.PyArray_DATA(vec)
    cdef const unsigned char* txt = <const unsigned char*> text_bytes
    cdef uint64_t h
    cdef Py_ssize_t i, n_chars, start, end
    cdef bytes tb
    cdef cnp.ndarray[cnp.int64_t, ndim=1] offs = np.asarray(offsets, dtype=np.int64)

    for tb in token_bytes:
        h = _fnv1a64_prefixed(<const unsigned char*> tb, len(tb))
        v[h % <uint64_t> dims] += 1.0 if (h >> 63) == 0 else -1.0

    n_chars = offs.shape[0] - 1
    for i in range(n_chars - 2):
        start = offs[i]
        end = offs[i + 3]
        h = _fnv1a64(txt + start, end - start)
        v[h % <uint64_t> dims] += 1.0 if (h >> 63) == 0 else -1.0
    return vec


def intersect_sorted(list a, list b):
    """Intersection of two sorted, deduplicated string lists."""
    cdef list out = []
    cdef Py_ssize_t i = 0, j = 0, na = len(a), nb = len(b)
    cdef object x, y
    while i < na and j < nb:
        x = a[i]
        y = b[j]
        if x == y:
            out.append(x)
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    return out


def within_window(list pos_a, list pos_b, int window):
    """True if some position pair from the two sorted lists is <= window apart."""
    cdef Py_ssize_t i = 0, j = 0, na = len(pos_a), nb = len(pos_b)
    cdef int64_t d, x, y
    while i < na and j < nb:
        x = pos_a[i]
        y = pos_b[j]
        d = x - y
        if d < 0:
            d = -d
        if d <= window:
            return True
        if x < y:
            i += 1
        else:
            j += 1
    return False
