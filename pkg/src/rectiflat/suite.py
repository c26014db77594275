"""Named suite spaces and the invariant verification suites.

The suite spaces are the fixed corpus used by the verification command and
the acceptance tests: segments with exactly representable spacings, circles,
parallel segments, Cantor clouds, noisy segments, and lifted zig-zags.
Each ``verify_*`` function returns a list of (check name, passed, detail)
triples; ``run_suite`` dispatches by name.
"""

from __future__ import annotations

import math

import numpy as np

from . import coeffs, covering, heisenberg as heis, menger, planes
from .core import GeneratorSpec, build_space, generate
from .dyadic import build_dyadic, verify_dyadic
from .errors import InvariantViolation

SUITE_NAMES = ("metric", "dyadic", "menger", "heisenberg", "planes", "covering")


def suite_spaces() -> dict:
    """The standard 1-regular analysis corpus (all n <= 256)."""
    return {
        "line65": generate(GeneratorSpec("line", n=65)),
        "line129": generate(GeneratorSpec("line", n=129)),
        "circle64": generate(GeneratorSpec("circle", n=64)),
        "parallel64": generate(GeneratorSpec("parallel-lines", n=64, eps=0.125, r=1.0)),
        "perturbed64": generate(GeneratorSpec("perturbed-line", n=64, noise=0.01, seed=7)),
        "cantor2": generate(GeneratorSpec("cantor4", depth=2)),
        "zigzag48": generate(GeneratorSpec("zigzag-lift", n=48, depth=2, p=3.0, seed=3)),
    }


def one_dimensional_suite() -> dict:
    return suite_spaces()


def euclidean_suite() -> dict:
    return {k: v for k, v in suite_spaces().items() if v.ambient.kind == "euclidean"}


def heisenberg_suite() -> dict:
    out = {k: v for k, v in suite_spaces().items() if v.ambient.kind == "heisenberg"}
    out["hline24"] = _horizontal_line_space(24)
    return out


def _horizontal_line_space(n):
    planar = np.column_stack([np.arange(n) / (n - 1), np.zeros(n)])
    pts = heis.horizontal_lift(planar, 0.0)
    return build_space(pts, "heisenberg:1", weights=np.full(n, 1.0 / n), s=1.0,
                       label=f"hline{n}")


def noisy_line_space(n, noise, seed, span=1.0):
    """Near-isometric-to-R clouds for the quantified-Menger corpus."""
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0.0, span, n))
    y = noise * rng.uniform(-1.0, 1.0, n)
    return build_space(np.column_stack([x, y]), "euclidean:2",
                       weights=np.full(n, span / n), s=1.0,
                       label=f"noisyline(n={n},noise={noise},seed={seed})")


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------

def verify_metric() -> list:
    checks = []
    for name, sp in suite_spaces().items():
        from . import kernels
        worst = kernels.triangle_violation(sp.D) if sp.n <= 300 else 0.0
        checks.append((f"triangle[{name}]", worst <= 1e-9, f"violation={worst:.2e}"))
        sym = float(np.max(np.abs(sp.D - sp.D.T)))
        checks.append((f"symmetry[{name}]", sym == 0.0, f"max={sym:.2e}"))
        if sp.coords is not None:
            ok = sp.matrix_consistent()
            checks.append((f"coords-match[{name}]", ok, "rtol 1e-12"))
    return checks


def verify_dyadic_suite() -> list:
    checks = []
    for name, sp in suite_spaces().items():
        rep = verify_dyadic(build_dyadic(sp))
        checks.append((f"dyadic[{name}]", rep["ok"], f"c0={rep['c0']:.4f}"))
    return checks


def verify_menger(n_quadruples=2000, seed=0) -> list:
    checks = []
    rng = np.random.default_rng(seed)
    violations = 0
    tried = 0
    for _ in range(n_quadruples):
        pts = rng.normal(size=(4, 3))
        sp = build_space(pts, "euclidean:3")
        ex = menger.set_excess(sp, np.arange(4))
        dpq = sp.dist(0, 1)
        if dpq <= 2 * ex:
            continue
        tried += 1
        try:
            menger.four_point_embed(sp, 0, 1, 2, 3, ex)
        except InvariantViolation:
            violations += 1
    checks.append(("four-point-dichotomy", violations == 0,
                   f"{tried} quadruples, {violations} violations"))

    bad = 0
    for s in range(40):
        sp = noisy_line_space(48, 1e-4, 1000 + s)
        beta = menger.set_excess(sp, sp.all_ids())
        sel = menger.select_anchors(sp)
        wit = menger.menger_map(sp, sel.p, sel.q)
        if sp.dist(sel.p, sel.q) > 40 * beta and wit.linf_distortion > 40 * beta + 1e-9:
            bad += 1
    checks.append(("quantified-menger-40beta", bad == 0, f"{bad} violations in 40 spaces"))

    sp = suite_spaces()["circle64"]
    rep = menger.circularity(sp, (0, 16, 32, 48))
    base = rep.eta_min
    ok = True
    import itertools
    for perm in itertools.permutations((0, 16, 32, 48)):
        if abs(menger.circularity(sp, perm).eta_min - base) > 0:
            ok = False
    checks.append(("circularity-relabeling", ok, "24 permutations"))
    return checks


def verify_heisenberg(seed=0) -> list:
    checks = []
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(200, 3))
    sp = build_space(P, "heisenberg:1")
    idx = rng.integers(0, 200, size=(100_000, 3))
    worst = float(np.max(sp.D[idx[:, 0], idx[:, 2]]
                         - sp.D[idx[:, 0], idx[:, 1]] - sp.D[idx[:, 1], idx[:, 2]]))
    checks.append(("koranyi-triangle", worst <= 1e-12, f"violation={worst:.2e}"))

    ok_inv, ok_eqv, ok_chart, ok_proj_dist, ok_lower = True, True, True, True, True
    for _ in range(300):
        p, q, w = rng.normal(size=3), rng.normal(size=3), rng.normal(size=3)
        if abs(heis.koranyi_dist(heis.heis_mul(w, p), heis.heis_mul(w, q))
               - heis.koranyi_dist(p, q)) > 1e-12:
            ok_inv = False
        ang = rng.uniform(0, math.pi)
        plane = heis.HorizontalPlane(q, np.array([[math.cos(ang), math.sin(ang)]]))
        lhs = heis.heis_mul(w, heis.horiz_project(plane, p))
        rhs = heis.horiz_project(heis.HorizontalPlane(heis.heis_mul(w, q), plane.frame),
                                 heis.heis_mul(w, p))
        if np.max(np.abs(lhs - rhs)) > 1e-12:
            ok_eqv = False
        # on-plane isometry and projected distances agree with the chart
        s1, s2 = rng.normal(size=2)
        v1 = heis.heis_mul(q, np.array([s1 * math.cos(ang), s1 * math.sin(ang), 0.0]))
        v2 = heis.heis_mul(q, np.array([s2 * math.cos(ang), s2 * math.sin(ang), 0.0]))
        if abs(heis.koranyi_dist(v1, v2) - abs(s1 - s2)) > 1e-12 * max(1, abs(s1 - s2)):
            ok_chart = False
        pr = heis.horiz_project_many(plane, np.array([p, w]))
        chart = heis.chart_coords_h(plane, np.array([p, w]))
        if abs(heis.koranyi_dist(pr[0], pr[1]) - abs(chart[0, 0] - chart[1, 0])) > 1e-12:
            ok_proj_dist = False
        if heis.koranyi_dist(p, q) < np.linalg.norm(p[:2] - q[:2]) - 1e-12:
            ok_lower = False
    checks.append(("left-invariance", ok_inv, "exact to 1e-12"))
    checks.append(("projection-equivariance", ok_eqv, "exact to 1e-12"))
    checks.append(("on-plane-isometry", ok_chart, "chart distance"))
    checks.append(("projected-distance-chart", ok_proj_dist, "exact"))
    checks.append(("koranyi-dominates-planar", ok_lower, "d >= |[p']-[p]|"))

    sandwich_ok = True
    for i in range(1000):
        p = rng.normal(size=3)
        ang = rng.uniform(0, math.pi)
        base = rng.normal(size=3)
        plane = heis.HorizontalPlane(base, np.array([[math.cos(ang), math.sin(ang)]]))
        try:
            heis.dist_to_hplane(plane, p, starts=3, seed=i)
        except AssertionError:
            sandwich_ok = False
    checks.append(("min-dist-projection-sandwich", sandwich_ok, "1000 samples, tol 1e-6"))
    return checks


def verify_planes(seed=0) -> list:
    checks = []
    rng = np.random.default_rng(seed)

    def rand_plane(n, k):
        return planes.AffinePlane(rng.normal(size=n),
                                  planes.orthonormal_rows(rng.normal(size=(k, n))))

    worst = -math.inf
    for _ in range(10_000):
        n, k = 4, 2
        v1, v2, v3 = (rand_plane(n, k) for _ in range(3))
        gap = (planes.angle_euclid(v1, v3)
               - planes.angle_euclid(v1, v2) - planes.angle_euclid(v2, v3))
        worst = max(worst, gap)
    checks.append(("angle-triangle-inequality", worst <= 1e-9, f"worst gap={worst:.2e}"))

    bad = 0
    for _ in range(10_000):
        n, k = 4, 2
        v1, v2 = rand_plane(n, k), rand_plane(n, k)
        x, y = rng.normal(size=n), rng.normal(size=n)
        if planes.two_plane_pythagoras_check(v1, v2, x, y) > 1e-9:
            bad += 1
    checks.append(("two-plane-pythagoras", bad == 0, f"{bad} positive residuals"))

    ok = True
    for name, sp in euclidean_suite().items():
        system = build_dyadic(sp)
        for q in system.all_cubes()[:10]:
            ids = system.enlarge(q, 2.0)
            if ids.size < 3 or sp.D[np.ix_(ids, ids)].max() == 0:
                continue
            plane = coeffs.beta(sp, ids, 1, "euclidean-1").witness
            v1 = coeffs.beta(sp, ids, 1, plane).raw
            v2 = coeffs.beta(sp, ids, 2, plane).raw
            if v1 > v2 + 1e-9:
                ok = False
    checks.append(("power-mean-monotonicity", ok, "beta_q <= beta_2q per plane"))
    return checks


def verify_covering(seed=0) -> list:
    checks = []
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, size=(100, 2))
    pts[0] = 0.0
    sp = build_space(pts, "euclidean:2", weights=np.full(100, 0.01))
    net = covering.short_network(sp, sp.all_ids(), 0, float(sp.D[0].max()), D=2.0)
    checks.append(("network-connected", net.connected, f"ratio={net.bound_ratio:.3f}"))

    span = np.linspace(0.0, 1000.0, 200)
    sp1 = build_space(span[:, None], "euclidean:1", weights=np.full(200, 5.0))
    cover = covering.spiral_cover(sp1, 0, t=2.0)
    rep = cover.properties
    checks.append(("spiral-coverage", rep["coverage"] == 1.0, f"M={rep['M']:.2f}"))
    checks.append(("spiral-finite-M", rep["M"] < 200.0, str(rep)))
    return checks


def run_suite(name: str) -> list:
    table = {
        "metric": verify_metric,
        "dyadic": verify_dyadic_suite,
        "menger": verify_menger,
        "heisenberg": verify_heisenberg,
        "planes": verify_planes,
        "covering": verify_covering,
    }
    if name not in table:
        raise KeyError(name)
    return table[name]()
