"""Constructive covering: short connecting networks and spiral ball covers.

Networks join a finite point set inside a ball through a greedy net of
centers: centers connect to the ball's center point, remaining points to
their nearest net center.  Euclidean edges are straight segments; Heisenberg
edges are staircase paths (horizontal lift of the planar segment followed by
a square-loop vertical correction of length 4 sqrt(|dt|)), whose measured
quasiconvexity factor is recorded on the network rather than assumed.

Spiral covers follow the annulus-net construction with lambda = 2t + 1 and
net radius lambda^(k-3) on the k-th annulus; the verifier measures all four
covering properties and returns the achieved constant M.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import check_subset, heis_omega, horizontal_lift
from .errors import AmbientError, DomainError, PreconditionError


@dataclass
class Edge:
    a: int
    b: int
    length: float
    polyline: np.ndarray  # (m, dim) vertices in ambient coordinates
    quasiconvexity: float = 1.0


@dataclass
class Network:
    point_ids: np.ndarray
    node_coords: np.ndarray
    edges: list
    total_length: float
    connected: bool
    quasiconvexity: float
    bound_ratio: float    # total_length / (r card(P)^{(2D-1)/(2D)})

    def to_record(self):
        return {
            "point_ids": self.point_ids.tolist(),
            "edges": [
                {"a": int(e.a), "b": int(e.b), "length": e.length,
                 "polyline": e.polyline.tolist()}
                for e in self.edges
            ],
            "total_length": self.total_length,
            "connected": self.connected,
            "quasiconvexity": self.quasiconvexity,
            "bound_ratio": self.bound_ratio,
        }


def _euclid_edge(a_coords, b_coords):
    length = float(np.linalg.norm(b_coords - a_coords))
    return length, np.array([a_coords, b_coords]), 1.0


def _heis_edge(p, q):
    """Staircase path p -> q: lifted planar segment plus a square loop."""
    from .heisenberg import koranyi_dist  # local import avoids a cycle

    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    planar = [p[:2]] if p.shape[0] == 3 else None
    if planar is None:
        raise AmbientError("staircase paths implemented for H^1 data")
    x_p, x_q = p[:2], q[:2]
    t_e = p[2] + float(heis_omega(x_p, x_q - x_p))
    dt = q[2] - t_e
    corners = [x_p, x_q]
    if dt != 0.0:
        a = math.sqrt(abs(dt))
        u = np.array([a, 0.0])
        v = np.array([0.0, a])
        if dt > 0:
            loop = [x_q + u, x_q + u + v, x_q + v, x_q]
        else:
            loop = [x_q + v, x_q + u + v, x_q + u, x_q]
        corners.extend(loop)
    poly = horizontal_lift(np.array(corners), p[2])
    length = float(np.linalg.norm(x_q - x_p) + (4.0 * math.sqrt(abs(dt)) if dt else 0.0))
    dist = koranyi_dist(p, q)
    quasi = length / dist if dist > 0 else 1.0
    return length, poly, quasi


def _edge_between(space, a_coords, b_coords):
    if space.ambient.kind == "euclidean":
        return _euclid_edge(a_coords, b_coords)
    if space.ambient.kind == "heisenberg":
        return _heis_edge(a_coords, b_coords)
    raise AmbientError("path construction needs a coordinate ambient")


def short_network(space, P, x: int, r: float, D: float = 2.0) -> Network:
    """Connected network covering P and the ball center x.

    P must lie in the closed ball of radius r around x; D >= 1 is the
    doubling parameter fixing the greedy net radius r card(P)^{-1/(2D)}.
    """
    if D < 1:
        raise DomainError("doubling parameter D must be >= 1")
    ids = check_subset(space, P)
    if space.ambient.kind == "abstract":
        raise AmbientError("path construction needs a coordinate ambient")
    for p in ids:
        if space.dist(p, x) > r * (1.0 + 1e-12):
            raise PreconditionError(f"point {p} outside the radius-{r} ball")
    others = ids[ids != x]
    if others.size == 0:
        return Network(np.array([x]), space.coords[[x]], [], 0.0, True, 1.0, 0.0)
    card = ids.size
    rho = r * card ** (-1.0 / (2.0 * D))
    centers = []
    for p in others:
        if all(space.dist(p, c) >= rho for c in centers):
            centers.append(int(p))
    nodes = [int(x)] + centers + [int(p) for p in others if int(p) not in centers]
    index = {pid: i for i, pid in enumerate(nodes)}
    coords = space.coords[nodes]
    edges = []
    total = 0.0
    quasi = 1.0
    for c in centers:
        length, poly, qv = _edge_between(space, space.coords[x], space.coords[c])
        edges.append(Edge(index[x], index[c], length, poly, qv))
        total += length
        quasi = max(quasi, qv)
    for p in others:
        p = int(p)
        if p in centers:
            continue
        dists = [space.dist(p, c) for c in centers]
        c = centers[int(np.argmin(dists))]
        length, poly, qv = _edge_between(space, space.coords[c], space.coords[p])
        edges.append(Edge(index[c], index[p], length, poly, qv))
        total += length
        quasi = max(quasi, qv)
    connected = _connected(len(nodes), edges)
    denom = r * card ** ((2.0 * D - 1.0) / (2.0 * D))
    return Network(np.array(nodes), coords, edges, total, connected, quasi,
                   total / denom if denom > 0 else 0.0)


def _connected(n_nodes, edges):
    if n_nodes <= 1:
        return True
    parent = list(range(n_nodes))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for e in edges:
        parent[find(e.a)] = find(e.b)
    return len({find(i) for i in range(n_nodes)}) == 1


# ---------------------------------------------------------------------------
# Spiral covers
# ---------------------------------------------------------------------------

@dataclass
class BallCover:
    center_point: int
    t: float
    lam: float
    balls: list  # (center id, radius)
    measured_M: float = 0.0
    properties: dict = field(default_factory=dict)


def spiral_cover(space, x0: int, t: float) -> BallCover:
    """Annulus-net ball cover around x0 with expansion factor t > 1."""
    if t <= 1:
        raise DomainError("spiral cover needs t > 1")
    lam = 2.0 * t + 1.0
    dists = space.D[x0]
    maxdist = float(dists.max())
    balls = [(int(x0), 1.0)]
    k = 1
    while lam ** (k - 1) <= maxdist:
        lo, hi = lam ** (k - 1), lam ** k
        members = np.flatnonzero((dists >= lo) & (dists < hi))
        radius = lam ** (k - 3)
        centers = []
        for p in members:
            if all(space.dist(int(p), c) >= radius for c in centers):
                centers.append(int(p))
        balls.extend((c, radius) for c in centers)
        k += 1
    cover = BallCover(int(x0), t, lam, balls)
    verify_spiral(space, cover)
    return cover


def verify_spiral(space, cover: BallCover) -> dict:
    """Measure the four covering properties; stores and returns the report."""
    t = cover.t
    x0 = cover.center_point
    n = space.n
    centers = np.array([b[0] for b in cover.balls])
    radii = np.array([b[1] for b in cover.balls])
    Dc = space.D[centers]  # (balls, n)

    covered = (Dc < radii[:, None]).any(axis=0)
    coverage = float(covered.mean())
    multiplicity = int((Dc < t * radii[:, None]).sum(axis=0).max())

    d0 = space.D[x0][centers]
    grid = sorted({1.0, *(cover.lam ** j for j in range(1, 12)
                          if cover.lam ** j <= 2 * max(float(space.D.max()), 1.0)),
                   max(float(space.D.max()), 1.0)})
    sum_ratio = 0.0
    for R in grid:
        meets = d0 < t * radii + R
        sum_ratio = max(sum_ratio, float(radii[meets].sum()) / R)

    center_ratio = float((d0 / radii).max())

    cc = space.D[np.ix_(centers, centers)]
    neigh = (cc < t * (radii[:, None] + radii[None, :])).sum(axis=1)
    neighbors = int(neigh.max())

    M = max(multiplicity, sum_ratio, center_ratio, float(neighbors), 2.0)
    report = {
        "coverage": coverage,
        "multiplicity": multiplicity,
        "radius_sum_ratio": sum_ratio,
        "center_distance_ratio": center_ratio,
        "max_neighbors": neighbors,
        "M": M,
    }
    cover.measured_M = M
    cover.properties = report
    return report


def network_union_regularity(space, networks, sample_ids, radii) -> float:
    """sup over sampled (z, R) of length(union cap B_R(z)) / R.

    Polylines are sampled at a fixed density, so this is an approximate
    (deterministic) upper-regularity gauge for the union of networks.
    """
    segs = []
    for net in networks:
        for e in net.edges:
            pts = e.polyline
            for i in range(len(pts) - 1):
                a, b = pts[i], pts[i + 1]
                pieces = 32
                ts = (np.arange(pieces) + 0.5) / pieces
                mids = a[None, :] + ts[:, None] * (b - a)[None, :]
                seg_len = np.linalg.norm(b - a) / pieces
                segs.append((mids, seg_len))
    worst = 0.0
    from .heisenberg import koranyi_norm

    for z in sample_ids:
        zc = space.coords[z]
        for R in radii:
            total = 0.0
            for mids, seg_len in segs:
                if space.ambient.kind == "euclidean":
                    inside = np.linalg.norm(mids - zc, axis=1) < R
                else:
                    inside = np.array([
                        koranyi_norm(np.concatenate([
                            m[:-1] - zc[:-1],
                            [m[-1] - zc[-1] - heis_omega(zc[:-1], m[:-1])],
                        ])) < R
                        for m in mids])
                total += seg_len * int(inside.sum())
            worst = max(worst, total / R)
    return worst
