"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

The backend is chosen once at import time from the ``PMICOPULA_BACKEND``
environment variable (``numba`` or ``numpy``).  When the variable is unset,
numba is used if it can be imported.  ``PMICOPULA_THREADS`` caps the number
of numba worker threads.
"""
import os

from . import _numpy as numpy_impl

_requested = os.environ.get("PMICOPULA_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ImportError(f"PMICOPULA_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

numba_impl = None
if _requested != "numpy":
    try:
        import numba

        if "NUMBA_THREADING_LAYER" not in os.environ:
            # the bundled TBB is often too old; prefer layers that always work
            numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
        from . import _numba as numba_impl
    except ImportError:
        if _requested == "numba":
            raise
        numba_impl = None

if numba_impl is not None:
    _threads = os.environ.get("PMICOPULA_THREADS")
    if _threads:
        numba.set_num_threads(int(_threads))

BACKEND = "numba" if numba_impl is not None else "numpy"
_impl = numba_impl if numba_impl is not None else numpy_impl

bvn_cdf = _impl.bvn_cdf
count_table = _impl.count_table
v_rect_integrals = _impl.v_rect_integrals
weighted_column_sums = _impl.weighted_column_sums

__all__ = ["BACKEND", "bvn_cdf", "count_table", "v_rect_integrals",
           "weighted_column_sums", "numpy_impl", "numba_impl"]
