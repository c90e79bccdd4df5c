"""Backend selection for the trace-sum kernels.

The compiled ``_kernels`` extension is used when it imports; otherwise, or when
the environment variable ``SATOTATE_PURE`` is set to a non-empty value other
than ``0``, the numpy module ``_kernels_py`` is used.  Both backends return
identical integers.
"""

import os

import numpy as np

from . import _kernels_py as python

compiled = None
if os.environ.get("SATOTATE_PURE", "") in ("", "0"):
    try:
        from . import _kernels as compiled
    except ImportError:  # extension not built
        compiled = None

_impl = compiled if compiled is not None else python
BACKEND = "cython" if compiled is not None else "python"


def field_tables(fld):
    """(shift, mul, chi) tables in the layout the kernels expect."""
    from .ffield import char_table

    shift = fld._cache.get("shift")
    if shift is None:
        shift = np.ascontiguousarray(fld.sub_table.T)
        shift.setflags(write=False)
        fld._cache["shift"] = shift
    return shift, fld.mul_table, char_table(fld)


def trace_values(tuples, shift, mul, chi, impl=None):
    impl = impl or _impl
    tuples = np.ascontiguousarray(tuples, dtype=np.int32)
    if tuples.ndim != 2 or tuples.shape[1] < 1:
        raise ValueError("tuples must be a non-empty 2-d array")
    return impl.trace_values(tuples, shift, mul, chi)


def unrank(ranks, q, n, impl=None):
    impl = impl or _impl
    return impl.unrank(np.ascontiguousarray(ranks, dtype=np.int64), q, n)


def trace_counts(start, count, n, shift, mul, chi, impl=None):
    impl = impl or _impl
    return impl.trace_counts(int(start), int(count), int(n), shift, mul, chi)
