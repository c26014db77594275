"""Kernel parity: the selected backend must match a brute-force oracle and
the pure-python fallback must match the compiled core when both exist."""

import itertools

import numpy as np
import pytest

from conftest import brute_excess, random_euclidean_space
from rectiflat import _kernels_py as kpy
from rectiflat import kernels


def _dense(n=24, seed=0):
    sp = random_euclidean_space(n, 3, seed)
    return sp.D, sp.weights


def test_excess_sum_max_against_brute_force():
    D, w = _dense()
    n = len(w)
    total = 0.0
    emax = 0.0
    for i, j, k in itertools.product(range(n), repeat=3):
        e = brute_excess(D[i, j], D[j, k], D[i, k])
        total += w[i] * w[j] * w[k] * e
        emax = max(emax, e)
    s, m = kernels.excess_sum_max(D, w)
    assert s == pytest.approx(total, rel=1e-12)
    assert m == pytest.approx(emax, rel=1e-12)


def test_excess_through_points_against_brute_force():
    D, w = _dense(18, 1)
    n = len(w)
    s1 = kernels.excess_through_points(D, w)
    for p in range(0, n, 5):
        want = sum(w[a] * w[b] * brute_excess(D[p, a], D[a, b], D[p, b])
                   for a in range(n) for b in range(n))
        assert s1[p] == pytest.approx(want, rel=1e-12)


def test_excess_through_pairs_against_brute_force():
    D, w = _dense(18, 2)
    n = len(w)
    s2 = kernels.excess_through_pairs(D, w)
    for p, q in ((0, 1), (3, 11), (16, 4)):
        want = sum(w[x] * brute_excess(D[p, q], D[q, x], D[p, x]) for x in range(n))
        assert s2[p, q] == pytest.approx(want, rel=1e-12)
        assert s2[q, p] == s2[p, q]


def test_triangle_violation_is_zero_on_metrics_and_detects_breaks():
    D, _ = _dense(20, 3)
    assert kernels.triangle_violation(D) <= 1e-12
    bad = D.copy()
    bad[0, 1] = bad[1, 0] = bad.max() * 3
    assert kernels.triangle_violation(bad) > 0.1


def test_backends_agree():
    try:
        from rectiflat import _kernels_cy as kcy
    except ImportError:
        pytest.skip("compiled core not built")
    D, w = _dense(40, 4)
    s_py, m_py = kpy.excess_sum_max(D, w)
    s_cy, m_cy = kcy.excess_sum_max(D, w)
    assert s_cy == pytest.approx(s_py, rel=1e-11)
    assert m_cy == m_py
    np.testing.assert_allclose(kcy.excess_through_points(D, w),
                               kpy.excess_through_points(D, w), rtol=1e-11)
    np.testing.assert_allclose(kcy.excess_through_pairs(D, w),
                               kpy.excess_through_pairs(D, w), rtol=1e-11)
    assert kcy.triangle_violation(D) == kpy.triangle_violation(D)


def test_kernels_deterministic_across_calls():
    D, w = _dense(30, 5)
    assert kernels.excess_sum_max(D, w) == kernels.excess_sum_max(D, w)
