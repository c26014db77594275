"""Pure-numpy implementations of the O(n^3) hot kernels.

Every function takes a dense symmetric distance matrix ``D`` (already
restricted to the subset of interest) plus a weight vector ``w`` and loops
over one index while broadcasting over the other two, so peak memory stays at
O(n^2).  Summation order is fixed (ascending index), which makes results
byte-reproducible run to run; the compiled backend reproduces the same loop
nest.

The triangular excess of a triple with sides a, b, c is
``a + b + c - 2*max(a, b, c)``, clamped at zero (the true excess of a metric
triple is nonnegative; the clamp only absorbs float rounding of the inputs).
"""

import numpy as np

BACKEND = "python"


def excess_sum_max(D, w):
    """Weighted sum of the triangular excess over ordered triples, plus max.

    Returns ``(S, m)`` with ``S = sum_{i,j,k} w_i w_j w_k excess(i,j,k)``
    over all ordered triples (repeats contribute zero) and
    ``m = max excess`` over triples.
    """
    n = D.shape[0]
    if n < 3:
        return 0.0, 0.0
    total = 0.0
    emax = 0.0
    for i in range(n - 2):
        a = D[i, i + 1 :][:, None]  # d(i, j), j > i
        b = D[i + 1 :, i + 1 :]  # d(j, k)
        c = D[i, i + 1 :][None, :]  # d(i, k)
        e = a + b + c - 2.0 * np.maximum(np.maximum(a, b), c)
        np.clip(e, 0.0, None, out=e)
        iu = np.triu_indices(e.shape[0], k=1)
        ev = e[iu]
        if ev.size:
            m = ev.max()
            if m > emax:
                emax = m
            wjk = (w[i + 1 :][:, None] * w[i + 1 :][None, :])[iu]
            total += w[i] * float(wjk @ ev)
    return 6.0 * total, float(emax)


def excess_through_points(D, w):
    """S1[p] = sum over ordered pairs (x, y) of w_x w_y excess(p, x, y)."""
    n = D.shape[0]
    out = np.zeros(n)
    for p in range(n):
        a = D[p, :][:, None]
        b = D
        c = D[p, :][None, :]
        e = a + b + c - 2.0 * np.maximum(np.maximum(a, b), c)
        np.clip(e, 0.0, None, out=e)
        out[p] = float(w @ e @ w)
    return out


def excess_through_pairs(D, w):
    """S2[p, q] = sum over x of w_x excess(p, q, x)."""
    n = D.shape[0]
    out = np.zeros((n, n))
    for x in range(n):
        b = D[x, :][None, :]  # d(q, x)
        c = D[x, :][:, None]  # d(p, x)
        e = D + b + c - 2.0 * np.maximum(np.maximum(D, b), c)
        np.clip(e, 0.0, None, out=e)
        out += w[x] * e
    # mirror the upper triangle so the matrix is exactly symmetric (the
    # summands are symmetric but their float addition order is not)
    iu = np.triu_indices(n, k=1)
    out[(iu[1], iu[0])] = out[iu]
    return out


def triangle_violation(D):
    """Max over ordered triples of d(i,k) - d(i,j) - d(j,k)."""
    n = D.shape[0]
    worst = -np.inf
    for j in range(n):
        v = D - D[:, j][:, None] - D[j, :][None, :]
        m = float(v.max())
        if m > worst:
            worst = m
    return worst
