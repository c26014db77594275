"""Short networks and spiral covers."""

import numpy as np
import pytest

from rectiflat.core import GeneratorSpec, build_space, generate, horizontal_lift
from rectiflat.covering import (network_union_regularity, short_network,
                                spiral_cover, verify_spiral)
from rectiflat.errors import AmbientError, DomainError, PreconditionError
from rectiflat.heisenberg import koranyi_dist


def test_network_trivial_and_two_points():
    sp = build_space(np.array([[0.0, 0.0], [0.5, 0.0]]), "euclidean:2")
    net = short_network(sp, [0], 0, 1.0)
    assert net.total_length == 0.0 and net.connected
    net2 = short_network(sp, [0, 1], 0, 1.0)
    assert len(net2.edges) == 1
    assert net2.total_length <= 2.0
    assert net2.connected


def test_network_preconditions():
    sp = build_space(np.array([[0.0, 0.0], [5.0, 0.0]]), "euclidean:2")
    with pytest.raises(PreconditionError):
        short_network(sp, [0, 1], 0, 1.0)
    with pytest.raises(DomainError):
        short_network(sp, [0], 0, 1.0, D=0.5)
    M = np.array([[0.0, 1.0], [1.0, 0.0]])
    ab = build_space(M, "abstract")
    with pytest.raises(AmbientError):
        short_network(ab, [0, 1], 0, 2.0)


def test_network_length_reporting_and_connectivity():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, size=(100, 2))
    pts[0] = 0.0
    sp = build_space(pts, "euclidean:2")
    r = float(sp.D[0].max())
    lengths = {}
    for seed_pts in range(1):
        net = short_network(sp, sp.all_ids(), 0, r, D=2.0)
        assert net.connected
        assert net.total_length == pytest.approx(sum(e.length for e in net.edges))
        lengths[seed_pts] = net.bound_ratio
    assert all(v < 10.0 for v in lengths.values())


def test_network_ratio_calibrated_across_seeds():
    ratios = []
    for seed in range(8):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-1, 1, size=(100, 2))
        pts[0] = 0.0
        sp = build_space(pts, "euclidean:2")
        net = short_network(sp, sp.all_ids(), 0, float(sp.D[0].max()), D=2.0)
        ratios.append(net.bound_ratio)
    lam = max(ratios)
    for seed in range(8, 12):  # holdout seeds
        rng = np.random.default_rng(seed)
        pts = rng.uniform(-1, 1, size=(100, 2))
        pts[0] = 0.0
        sp = build_space(pts, "euclidean:2")
        net = short_network(sp, sp.all_ids(), 0, float(sp.D[0].max()), D=2.0)
        assert net.bound_ratio <= 2 * lam


def test_network_exponent_sanity():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-1, 1, size=(80, 2))
    pts[0] = 0.0
    sp = build_space(pts, "euclidean:2")
    r = float(sp.D[0].max())
    net = short_network(sp, sp.all_ids(), 0, r, D=2.0)
    # a larger doubling exponent only strengthens the cardinality power, so
    # the same network measured against D' > D has a smaller ratio
    card = len(sp.all_ids())
    for Dp in (3.0, 4.0):
        denom = r * card ** ((2 * Dp - 1) / (2 * Dp))
        assert net.total_length / denom <= net.bound_ratio + 1e-12


def test_heisenberg_network_quasiconvexity():
    planar = np.column_stack([np.linspace(0, 1, 10), 0.2 * np.sin(np.linspace(0, 6, 10))])
    pts = horizontal_lift(planar)
    sp = build_space(pts, "heisenberg:1", weights=np.full(10, 0.1))
    r = float(sp.D[0].max())
    net = short_network(sp, sp.all_ids(), 0, r, D=2.0)
    assert net.connected
    assert net.quasiconvexity >= 1.0
    assert net.quasiconvexity < 10.0
    # staircase endpoints land on the targets: verify one edge length form
    for e in net.edges:
        a = net.node_coords[e.a]
        b = net.node_coords[e.b]
        assert e.length >= koranyi_dist(a, b) - 1e-9


def test_spiral_cover_two_points():
    sp = build_space(np.array([[0.0], [0.5]]), "euclidean:1")
    cover = spiral_cover(sp, 0, t=2.0)
    assert len(cover.balls) <= 2
    assert cover.properties["coverage"] == 1.0


def test_spiral_cover_long_line_properties():
    span = np.linspace(0.0, 1000.0, 250)
    sp = build_space(span[:, None], "euclidean:1", weights=np.full(250, 4.0))
    cover = spiral_cover(sp, 0, t=2.0)
    rep = cover.properties
    assert rep["coverage"] == 1.0
    assert rep["M"] < 150.0
    assert cover.lam == 5.0
    # re-verification is deterministic
    assert verify_spiral(sp, cover) == rep


def test_spiral_cover_circle_multiplicity_stable():
    # the multiplicity of {tB} depends only on doubling geometry, so it must
    # stay below a fixed small bound as the cloud resolution doubles
    mults = {}
    for n in (128, 256):
        sp = generate(GeneratorSpec("circle", n=n))
        scaled = build_space(40.0 * sp.coords, "euclidean:2", weights=sp.weights)
        cover = spiral_cover(scaled, 0, t=2.0)
        mults[n] = cover.properties["multiplicity"]
    assert max(mults.values()) <= 8
    assert mults[256] <= 2 * mults[128]


def test_union_regularity_finite_and_stable():
    worsts = []
    for seed in (0, 1):
        rng = np.random.default_rng(seed)
        pts = 50.0 * rng.uniform(-1, 1, size=(120, 2))
        pts[0] = 0.0
        sp = build_space(pts, "euclidean:2")
        cover = spiral_cover(sp, 0, t=2.0)
        nets = []
        for c, r in cover.balls:
            inside = np.flatnonzero(sp.D[c] <= cover.t * r)
            if inside.size >= 2:
                nets.append(short_network(sp, inside, c, cover.t * r, D=2.0))
        worst = network_union_regularity(sp, nets, sample_ids=[0, 5, 17],
                                         radii=[5.0, 20.0, 60.0])
        worsts.append(worst)
        assert np.isfinite(worst)
    assert worsts[1] <= 4 * worsts[0] + 1e-9
