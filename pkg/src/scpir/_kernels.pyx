# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same signatures as ``_kernels_py``."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def xor_gather(table, indptr, indices):
    cdef const unsigned char[:, ::1] tab = np.ascontiguousarray(table, dtype=np.uint8)
    cdef const long long[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const long long[::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t n = ptr.shape[0] - 1
    cdef Py_ssize_t width = tab.shape[1]
    cdef Py_ssize_t rows = tab.shape[0]
    out_arr = np.zeros((n, width), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef Py_ssize_t i, p, c
    cdef long long row
    for i in range(n):
        for p in range(ptr[i], ptr[i + 1]):
            row = idx[p]
            if row < 0 or row >= rows:
                raise IndexError(f"symbol row {row} outside table of {rows} rows")
            for c in range(width):
                out[i, c] ^= tab[row, c]
    return out_arr
