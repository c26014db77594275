"""Heisenberg group: metric, projections, Pythagoras checks, lifts, fits."""

import math

import numpy as np
import pytest

from rectiflat.core import GeneratorSpec, build_space, generate, horizontal_lift
from rectiflat.errors import DomainError, PreconditionError
from rectiflat.heisenberg import (HorizontalPlane, angle_heis, chart_coords_h,
                                  dist_to_hplane, embed_h1_to_hn,
                                  embed_r2_to_hn, fit_hplane_report,
                                  heis_independent_points, heis_inv, heis_mul,
                                  heis_pythagoras_check,
                                  heis_pythagoras_required_N,
                                  heis_tilting_ratio, heis_two_plane_check,
                                  heis_two_plane_required_N, horiz_project,
                                  horiz_project_many, koranyi_dist,
                                  koranyi_norm, proj_dist, proj_dist_many,
                                  symplectic_orthonormalize)
from rectiflat.dyadic import build_dyadic


def _rand_hline(rng):
    ang = rng.uniform(0, math.pi)
    return HorizontalPlane(rng.normal(size=3),
                           np.array([[math.cos(ang), math.sin(ang)]]))


def test_group_law_examples():
    np.testing.assert_allclose(heis_mul([1, 0, 0], [0, 1, 0]), [1, 1, 0.5])
    assert koranyi_norm([0, 0, 1]) == 2.0
    assert koranyi_dist([0, 0, 0], [3, 0, 0]) == 3.0
    p = np.array([0.3, -1.2, 0.7])
    np.testing.assert_allclose(heis_mul(p, heis_inv(p)), 0.0, atol=1e-15)


def test_koranyi_metric_axioms_sampled():
    rng = np.random.default_rng(0)
    P = rng.normal(size=(50, 5))  # H^2
    sp = build_space(P, "heisenberg:2")
    idx = rng.integers(0, 50, size=(20000, 3))
    worst = float(np.max(sp.D[idx[:, 0], idx[:, 2]]
                         - sp.D[idx[:, 0], idx[:, 1]] - sp.D[idx[:, 1], idx[:, 2]]))
    assert worst <= 1e-12


def test_left_invariance_exact():
    rng = np.random.default_rng(1)
    for _ in range(500):
        p, q, w = rng.normal(size=3), rng.normal(size=3), rng.normal(size=3)
        lhs = koranyi_dist(heis_mul(w, p), heis_mul(w, q))
        assert lhs == pytest.approx(koranyi_dist(p, q), abs=1e-12, rel=1e-12)


def test_koranyi_dominates_planar_distance():
    rng = np.random.default_rng(2)
    for _ in range(500):
        p, q = rng.normal(size=3), rng.normal(size=3)
        assert koranyi_dist(p, q) >= np.linalg.norm(p[:2] - q[:2]) - 1e-13


def test_projection_examples():
    xaxis = HorizontalPlane(np.zeros(3), np.array([[1.0, 0.0]]))
    np.testing.assert_allclose(horiz_project(xaxis, [3, 4, 5]), [3, 0, 0])
    shifted = HorizontalPlane(np.array([0.0, 1.0, 0.0]), np.array([[1.0, 0.0]]))
    np.testing.assert_allclose(horiz_project(shifted, [2, 0, 0]), [2, 1, -1])
    p = horiz_project(shifted, [2, 0, 0])
    np.testing.assert_allclose(horiz_project(shifted, p), p, atol=1e-14)


def test_projection_equivariance_and_lipschitz():
    rng = np.random.default_rng(3)
    for _ in range(300):
        plane = _rand_hline(rng)
        p, q, w = rng.normal(size=3), rng.normal(size=3), rng.normal(size=3)
        lhs = heis_mul(w, horiz_project(plane, p))
        rhs = horiz_project(HorizontalPlane(heis_mul(w, plane.base), plane.frame),
                            heis_mul(w, p))
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)
        dp = koranyi_dist(horiz_project(plane, p), horiz_project(plane, q))
        assert dp <= koranyi_dist(p, q) * (1 + 1e-12) + 1e-12


def test_projected_distance_equals_chart_distance():
    rng = np.random.default_rng(4)
    for _ in range(200):
        plane = _rand_hline(rng)
        P = rng.normal(size=(2, 3))
        proj = horiz_project_many(plane, P)
        chart = chart_coords_h(plane, P)
        assert koranyi_dist(proj[0], proj[1]) == pytest.approx(
            abs(chart[0, 0] - chart[1, 0]), abs=1e-12)


def test_on_plane_isometry():
    rng = np.random.default_rng(5)
    plane = _rand_hline(rng)
    for _ in range(100):
        s1, s2 = rng.normal(size=2)
        v = plane.frame[0]
        p1 = heis_mul(plane.base, np.array([s1 * v[0], s1 * v[1], 0.0]))
        p2 = heis_mul(plane.base, np.array([s2 * v[0], s2 * v[1], 0.0]))
        assert koranyi_dist(p1, p2) == pytest.approx(abs(s1 - s2), rel=1e-12, abs=1e-12)


def test_dist_to_hplane_examples():
    xaxis = HorizontalPlane(np.zeros(3), np.array([[1.0, 0.0]]))
    r = dist_to_hplane(xaxis, [0, 0, 1])
    assert r.value == pytest.approx(2.0, rel=1e-6)
    assert r.upper == 2.0
    on = horiz_project(xaxis, np.array([0.4, 0.0, 0.0]))
    assert dist_to_hplane(xaxis, on).value == pytest.approx(0.0, abs=1e-9)


def test_dist_to_hplane_matches_grid_oracle():
    rng = np.random.default_rng(6)
    for i in range(10):
        plane = _rand_hline(rng)
        p = rng.normal(size=3)
        got = dist_to_hplane(plane, p, starts=4, seed=i)
        # oracle: dense 1-d grid over the chart parameter
        s0 = float((plane.frame @ (p[:-1] - plane.base[:-1]))[0])
        grid = s0 + np.linspace(-3, 3, 20001) * max(got.upper, 1e-9)
        v = plane.frame[0]
        best = math.inf
        for s in grid:
            pt = heis_mul(plane.base, np.array([s * v[0], s * v[1], 0.0]))
            best = min(best, koranyi_dist(p, pt))
        assert got.value == pytest.approx(best, abs=1e-4 * max(1.0, best))


def test_min_dist_projection_sandwich_seeded():
    rng = np.random.default_rng(7)
    for i in range(200):
        plane = _rand_hline(rng)
        p = rng.normal(size=3)
        r = dist_to_hplane(plane, p, starts=3, seed=i)  # asserts the sandwich
        assert r.lower <= r.value + 1e-6
        assert r.value <= r.upper + 1e-6


def test_angle_heis_examples():
    x = HorizontalPlane(np.zeros(3), np.array([[1.0, 0.0]]))
    y = HorizontalPlane(np.ones(3), np.array([[0.0, 1.0]]))
    assert angle_heis(x, x) == 0.0
    assert angle_heis(x, y) == 1.0


def test_pythagoras_checks_calibrate_then_hold():
    rng = np.random.default_rng(8)
    c = 0.25

    def sample_config(seed_rng):
        plane = _rand_hline(seed_rng)
        v = plane.frame[0]
        s1, s2 = seed_rng.uniform(-2, 2, 2)
        noise = 0.02
        p1 = heis_mul(plane.base, np.array([s1 * v[0], s1 * v[1], 0.0]))
        p2 = heis_mul(plane.base, np.array([s2 * v[0], s2 * v[1], 0.0]))
        p1 = p1 + noise * seed_rng.normal(size=3)
        p2 = p2 + noise * seed_rng.normal(size=3)
        return plane, p1, p2

    need = 0.0
    kept = 0
    for _ in range(3000):
        plane, p1, p2 = sample_config(rng)
        try:
            need = max(need, heis_pythagoras_required_N(plane, p1, p2, c))
            kept += 1
        except (PreconditionError, DomainError):
            continue
    assert kept > 500
    N = 2.0 * max(need, 1e-6)
    holdout = np.random.default_rng(9)
    for _ in range(3000):
        plane, p1, p2 = sample_config(holdout)
        try:
            assert heis_pythagoras_check(plane, p1, p2, c, N) <= 1e-9
        except (PreconditionError, DomainError):
            continue


def test_two_plane_check_calibrate_then_hold():
    rng = np.random.default_rng(10)
    c = 0.25
    need = 0.0
    kept = 0

    def sample_config(g):
        v = _rand_hline(g)
        w = _rand_hline(g)
        s1, s2 = g.uniform(-2, 2, 2)
        vv = v.frame[0]
        p1 = heis_mul(v.base, np.array([s1 * vv[0], s1 * vv[1], 0.0]))
        p2 = heis_mul(v.base, np.array([s2 * vv[0], s2 * vv[1], 0.0]))
        return v, w, p1 + 0.02 * g.normal(size=3), p2 + 0.02 * g.normal(size=3)

    for _ in range(2000):
        v, w, x, y = sample_config(rng)
        try:
            need = max(need, heis_two_plane_required_N(v, w, x, y, c))
            kept += 1
        except (PreconditionError, DomainError):
            continue
    assert kept > 300
    N0 = 2.0 * max(need, 1e-6)
    holdout = np.random.default_rng(11)
    for _ in range(2000):
        v, w, x, y = sample_config(holdout)
        try:
            assert heis_two_plane_check(v, w, x, y, c, N0) <= 1e-9
        except (PreconditionError, DomainError):
            continue


def test_symplectic_orthonormalize():
    rng = np.random.default_rng(12)
    for _ in range(20):
        frame = symplectic_orthonormalize(rng.normal(size=(2, 6)))  # H^3, k=2
        gram = frame @ frame.T
        np.testing.assert_allclose(gram, np.eye(2), atol=1e-12)
        m = 3
        om = 0.5 * (frame[0, :m] @ frame[1, m:] - frame[0, m:] @ frame[1, :m])
        assert abs(om) <= 1e-12


def test_fit_hplane_on_horizontal_line():
    planar = np.column_stack([np.linspace(0, 1, 14), np.zeros(14)])
    pts = horizontal_lift(planar)
    sp = build_space(pts, "heisenberg:1", weights=np.full(14, 1 / 14))
    fit = fit_hplane_report(sp, sp.all_ids(), q=2, k=1)
    assert fit.value <= 1e-8
    assert not fit.flagged


def test_fit_hplane_on_embedded_planar_line():
    line = np.column_stack([np.linspace(0, 1, 10), 0.3 * np.linspace(0, 1, 10)])
    pts = np.array([embed_r2_to_hn(x, 2) for x in line])
    sp = build_space(pts, "heisenberg:2", weights=np.full(10, 0.1))
    fit = fit_hplane_report(sp, sp.all_ids(), q=2, k=1)
    assert fit.value <= 1e-6


def test_fit_hplane_zigzag_vs_baseline():
    sp = generate(GeneratorSpec("zigzag-lift", n=24, depth=3, p=3.0))
    fit = fit_hplane_report(sp, sp.all_ids(), q=math.inf, k=1)
    assert fit.value <= 1.1 * fit.baseline + 1e-12


def test_embeddings_exact():
    rng = np.random.default_rng(13)
    for _ in range(100):
        p, q = rng.normal(size=3), rng.normal(size=3)
        assert koranyi_dist(embed_h1_to_hn(p, 3), embed_h1_to_hn(q, 3)) == pytest.approx(
            koranyi_dist(p, q), rel=1e-12, abs=1e-12)
        a, b = rng.normal(size=2), rng.normal(size=2)
        assert koranyi_dist(embed_r2_to_hn(a, 2), embed_r2_to_hn(b, 2)) == pytest.approx(
            float(np.linalg.norm(a - b)), rel=1e-12, abs=1e-12)
    assert koranyi_norm(embed_r2_to_hn([1.0, 2.0], 3)) == pytest.approx(math.sqrt(5))


def test_beta_witness_transfer_under_embedding():
    # evaluating the embedded best line never beats the intrinsic H^1 value
    sp1 = generate(GeneratorSpec("zigzag-lift", n=16, depth=2, p=3.0))
    fit1 = fit_hplane_report(sp1, sp1.all_ids(), q=math.inf, k=1)
    pts_n = np.array([embed_h1_to_hn(p, 2) for p in sp1.coords])
    spn = build_space(pts_n, "heisenberg:2", weights=sp1.weights)
    frame_n = np.zeros((1, 4))
    frame_n[0, 0] = fit1.plane.frame[0, 0]
    frame_n[0, 2] = fit1.plane.frame[0, 1]
    plane_n = HorizontalPlane(embed_h1_to_hn(fit1.plane.base, 2), frame_n)
    d1 = proj_dist_many(fit1.plane, sp1.coords)
    dn = proj_dist_many(plane_n, spn.coords)
    np.testing.assert_allclose(dn, d1, atol=1e-12)


def test_horizontal_lift_examples():
    out = horizontal_lift(np.array([[0.0, 0.0], [1.0, 0.0]]))
    np.testing.assert_allclose(out[-1], [1, 0, 0])
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]], dtype=float)
    np.testing.assert_allclose(horizontal_lift(square)[-1], [0, 0, 1])
    sp = generate(GeneratorSpec("zigzag-lift", n=30, depth=2, p=4.0))
    relift = horizontal_lift(sp.coords[:, :2], sp.coords[0, 2])
    np.testing.assert_array_equal(relift, sp.coords)


def test_heis_independent_points():
    planar = np.column_stack([np.linspace(0, 1, 16), np.zeros(16)])
    sp = build_space(horizontal_lift(planar), "heisenberg:1",
                     weights=np.full(16, 1 / 16))
    res = heis_independent_points(sp, sp.all_ids(), 1)
    assert res.score >= 0.49  # two far points on a segment
    sp2 = generate(GeneratorSpec("zigzag-lift", n=20, depth=2, p=3.0))
    res2 = heis_independent_points(sp2, sp2.all_ids(), 1)
    assert res2.score > 0


def test_heis_tilting_ratio_bounded():
    sp = generate(GeneratorSpec("zigzag-lift", n=32, depth=2, p=3.0))
    system = build_dyadic(sp)
    ratios = []
    for q in system.all_cubes():
        if q.parent == -1 or q.level > system.j_min + 3:
            continue
        parent = system.cubes[q.parent]
        try:
            ratios.append(heis_tilting_ratio(system, q, parent, 1.0, 2.0))
        except PreconditionError:
            continue
    assert ratios and all(np.isfinite(r) for r in ratios)
