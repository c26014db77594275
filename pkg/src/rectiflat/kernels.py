"""Backend selection for the O(n^3) hot kernels.

The compiled Cython core (`rectiflat._kernels_cy`, built via
``python setup.py build_ext --inplace``) is preferred when importable;
otherwise the chunked-numpy fallback is used.  Both expose the same four
functions and agree to float rounding (parity is tested, and
``bench/benchmark_kernels.py`` compares their speed).

All callers pass a dense float64 distance matrix already restricted to the
subset of interest, C-contiguous, plus matching weights.
"""

import numpy as np

try:
    from . import _kernels_cy as _impl
except ImportError:  # compiled core not built
    from . import _kernels_py as _impl

BACKEND = _impl.BACKEND


def _prep(D, w):
    D = np.ascontiguousarray(D, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    return D, w


def excess_sum_max(D, w):
    """(weighted ordered-triple sum of triangular excess, max excess)."""
    D, w = _prep(D, w)
    return _impl.excess_sum_max(D, w)


def excess_through_points(D, w):
    """Per-point excess functional S1[p] = sum_{x,y} w_x w_y excess(p,x,y)."""
    D, w = _prep(D, w)
    return _impl.excess_through_points(D, w)


def excess_through_pairs(D, w):
    """Pair excess functional S2[p,q] = sum_x w_x excess(p,q,x)."""
    D, w = _prep(D, w)
    return _impl.excess_through_pairs(D, w)


def triangle_violation(D):
    """Max over ordered triples of d(i,k) - d(i,j) - d(j,k)."""
    D = np.ascontiguousarray(D, dtype=np.float64)
    return _impl.triangle_violation(D)
