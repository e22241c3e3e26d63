"""Array-level box kernels with a compiled core and a numpy fallback.

The Cython extension is optional: when it is not built, the pure numpy
implementations are used instead.  ``BACKEND`` reports which one is
active; both produce identical results (benchmarks/bench_boxops.py
compares their speed).
"""

from . import _kernels_py

try:
    from . import _kernels_cy as _impl
except ImportError:
    _impl = _kernels_py

BACKEND = _impl.BACKEND

iou_matrix = _impl.iou_matrix
contains_mask = _impl.contains_mask
greedy_dedup_mask = _impl.greedy_dedup_mask

__all__ = ["BACKEND", "iou_matrix", "contains_mask", "greedy_dedup_mask"]
