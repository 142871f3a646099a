"""Pure-Python reference kernels. Same signatures as the compiled ``_kernels``."""

import numpy as np


def xor_gather(table, indptr, indices):
    """Row ``i`` of the result is the XOR of ``table[indices[indptr[i]:indptr[i+1]]]``.

    ``table`` is a 2-D uint8 array (one row per symbol); empty groups give zero rows.
    """
    table = np.asarray(table, dtype=np.uint8)
    n = len(indptr) - 1
    out = np.zeros((n, table.shape[1]), dtype=np.uint8)
    for i in range(n):
        acc = out[i]
        for p in range(indptr[i], indptr[i + 1]):
            row = indices[p]
            if row < 0 or row >= table.shape[0]:
                raise IndexError(f"symbol row {row} outside table of {table.shape[0]} rows")
            np.bitwise_xor(acc, table[row], out=acc)
    return out
