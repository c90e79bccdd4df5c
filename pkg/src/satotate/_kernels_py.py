"""Numpy implementations of the trace-sum kernels (fallback for ``_kernels``).

Same signatures and results as the compiled module; tuples are processed in
row batches so the ``(batch, q)`` working arrays stay small.
"""

import numpy as np

BATCH = 4096


def trace_values(tuples, shift, mul, chi):
    tuples = np.asarray(tuples)
    N, n = tuples.shape
    out = np.empty(N, dtype=np.int64)
    for lo in range(0, N, BATCH):
        block = tuples[lo:lo + BATCH]
        acc = shift[block[:, 0]]
        for i in range(1, n):
            acc = mul[acc, shift[block[:, i]]]
        out[lo:lo + BATCH] = -chi[acc].sum(axis=1, dtype=np.int64)
    return out


def unrank(ranks, q, n):
    ranks = np.asarray(ranks, dtype=np.int64)
    radices = [q - i for i in range(n)]
    digits = np.empty((len(ranks), n), dtype=np.int64)
    r = ranks.copy()
    for i in reversed(range(n)):
        r, digits[:, i] = np.divmod(r, radices[i])
    out = np.empty((len(ranks), n), dtype=np.int64)
    for i in range(n):
        v = digits[:, i].copy()
        if i:
            # the d-th unused value: bump past each earlier value, smallest first
            for prev in np.sort(out[:, :i], axis=1).T:
                v += prev <= v
        out[:, i] = v
    return out.astype(np.int32)


def trace_counts(start, count, n, shift, mul, chi):
    q = len(chi)
    counts = np.zeros(2 * q + 1, dtype=np.int64)
    for lo in range(start, start + count, BATCH):
        hi = min(lo + BATCH, start + count)
        tup = unrank(np.arange(lo, hi, dtype=np.int64), q, n)
        counts += np.bincount(trace_values(tup, shift, mul, chi) + q,
                              minlength=2 * q + 1)
    return counts
