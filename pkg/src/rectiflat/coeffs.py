"""Pointwise flatness coefficients: triangular excess, Menger curvature,
beta-numbers, kappa-numbers, and iota-numbers (two-sided brackets).

All coefficients are ratio-normalized by the subset diameter, so they are
invariant under simultaneous rescaling of distances and weights.  Values are
reported raw and clamped into [0, 1] (geometric-lemma sums use the clamped
form by default, matching the [0, 1] range the Carleson condition expects).

The iota bracket pairs a certified lower bound (kappa / 3 in the q = 1,
k = 1 regime, where every candidate map's distortion dominates a third of
kappa) with the best exact distortion objective over an explicit candidate
family: anchored sign maps, isometric plane charts, a classical-scaling
embedding, and an optional fixed-budget subgradient refinement.  The upper
side is therefore always an upper bound of the true infimum, never a guess.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import heisenberg as heis
from . import kernels, menger, planes
from .core import check_subset, diam as space_diam
from .errors import AmbientError, DegenerateError, DomainError

EXACT_CAP = 256


@dataclass
class CoefficientValue:
    raw: float
    clamped: float = None
    mode: str = "exact"       # "exact" | "monte-carlo"
    samples: int = 0
    seed: int = 0
    std_error: float = 0.0
    witness: object = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.clamped is None:
            self.clamped = min(self.raw, 1.0)


def triangular_excess(space, i, j, k) -> float:
    """min over middle choices of d(a,b) + d(b,c) - d(a,c); 0 with repeats."""
    a = space.dist(i, j)
    b = space.dist(j, k)
    c = space.dist(i, k)
    return menger.triple_excess_sides(a, b, c)


def menger_curvature(space, i, j, k) -> float:
    """1/R of the circumscribed circle of the comparison triangle.

    Zero for collinear or degenerate (repeated-point) triples.  Uses the
    numerically stable Heron form on sorted sides.
    """
    sides = sorted((space.dist(i, j), space.dist(j, k), space.dist(i, k)))
    c_, b_, a_ = sides  # a_ >= b_ >= c_
    if c_ <= 0.0:
        return 0.0
    area_sq = (a_ + (b_ + c_)) * (c_ - (a_ - b_)) * (c_ + (a_ - b_)) * (a_ + (b_ - c_))
    if area_sq <= 0.0:
        return 0.0
    area = 0.25 * math.sqrt(area_sq)
    return 4.0 * area / (a_ * b_ * c_)


def _parse_family(tag: str):
    if tag.startswith("euclidean-"):
        return "euclidean", int(tag.split("-")[-1])
    if tag.startswith("heis-horizontal-"):
        return "heisenberg", int(tag.split("-")[-1])
    raise DomainError(f"unknown plane family {tag!r}")


def _plane_dists(space, ids, plane):
    if isinstance(plane, planes.AffinePlane):
        if space.ambient.kind != "euclidean":
            raise AmbientError("euclidean plane on a non-euclidean space")
        return planes.dists_to_plane(plane, space.coords[ids])
    if isinstance(plane, heis.HorizontalPlane):
        if space.ambient.kind != "heisenberg":
            raise AmbientError("horizontal plane on a non-heisenberg space")
        return heis.proj_dist_many(plane, space.coords[ids])
    raise DomainError(f"not a plane: {plane!r}")


def beta(space, subset, q, plane_source) -> CoefficientValue:
    """L^q (or sup) mean of the plane distance over the subset, diameter
    normalized.  ``plane_source`` is a fixed plane or a family tag
    ("euclidean-k", "heis-horizontal-k") that triggers fitting; fitted
    values carry the realizer plane and its 2-approximation slack."""
    ids = check_subset(space, subset)
    diameter = space_diam(space, ids)
    if diameter <= 0.0:
        raise DomainError("beta needs a subset of positive diameter")
    if isinstance(plane_source, str):
        kind, k = _parse_family(plane_source)
        if kind == "euclidean":
            fit = planes.fit_plane_report(space, ids, k, q)
        else:
            fit = heis.fit_hplane_report(space, ids, q, k)
        return CoefficientValue(fit.value, witness=fit.plane,
                                meta={"slack": fit.slack, "flagged": fit.flagged,
                                      "baseline": fit.baseline, "family": plane_source})
    dists = _plane_dists(space, ids, plane_source) / diameter
    w = space.weights[ids]
    if q == math.inf:
        raw = float(dists.max())
    else:
        raw = float(((w @ dists ** q) / w.sum()) ** (1.0 / q))
    return CoefficientValue(raw, witness=plane_source)


def kappa(space, subset, exact_cap=EXACT_CAP, mc_samples=100_000, seed=0) -> CoefficientValue:
    """Triple-sum triangular-excess coefficient (exact or seeded Monte Carlo)."""
    ids = check_subset(space, subset)
    diameter = space_diam(space, ids)
    if diameter <= 0.0:
        raise DomainError("kappa needs a subset of positive diameter")
    D, w = space.submatrix(ids)
    mu = float(w.sum())
    if ids.size <= exact_cap:
        total, _ = kernels.excess_sum_max(D, w)
        return CoefficientValue(total / (mu ** 3 * diameter))
    rng = np.random.default_rng(seed)
    probs = w / mu
    idx = rng.choice(ids.size, size=(mc_samples, 3), p=probs)
    a = D[idx[:, 0], idx[:, 1]]
    b = D[idx[:, 1], idx[:, 2]]
    c = D[idx[:, 0], idx[:, 2]]
    vals = np.maximum(a + b + c - 2.0 * np.maximum(np.maximum(a, b), c), 0.0) / diameter
    raw = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(mc_samples))
    return CoefficientValue(raw, mode="monte-carlo", samples=mc_samples,
                            seed=seed, std_error=se)


def _projected_matrix(space, ids, plane):
    """Pairwise distances of the projected points.

    Projected distances are translation invariant, so they are computed from
    frame coordinates without subtracting the base point; points already on
    an axis-aligned plane then keep their distances exactly.
    """
    if isinstance(plane, planes.AffinePlane):
        if space.ambient.kind != "euclidean":
            raise AmbientError("euclidean plane on a non-euclidean space")
        chart = space.coords[ids] @ plane.frame.T
    elif isinstance(plane, heis.HorizontalPlane):
        if space.ambient.kind != "heisenberg":
            raise AmbientError("horizontal plane on a non-heisenberg space")
        chart = space.coords[ids][:, :-1] @ plane.frame.T
    else:
        raise DomainError(f"not a plane: {plane!r}")
    diff = chart[:, None, :] - chart[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def iota_plane(space, subset, q, plane) -> CoefficientValue:
    """Projection-based iota: L^q mean of |d(x,y) - d(pi x, pi y)| / diam."""
    if space.ambient.kind == "abstract":
        raise AmbientError("iota_plane needs a coordinate ambient")
    ids = check_subset(space, subset)
    diameter = space_diam(space, ids)
    if diameter <= 0.0:
        raise DomainError("iota_plane needs positive diameter")
    D, w = space.submatrix(ids)
    Dp = _projected_matrix(space, ids, plane)
    err = np.abs(D - Dp) / diameter
    if q == math.inf:
        raw = float(err.max())
    else:
        mu = w.sum()
        raw = float(((w @ err ** q @ w) / (mu * mu)) ** (1.0 / q))
    return CoefficientValue(raw, witness=plane)


# ---------------------------------------------------------------------------
# Iota brackets
# ---------------------------------------------------------------------------

@dataclass
class CandidateMap:
    kind: str            # "anchor" | "chart" | "mds" | "refined"
    ids: np.ndarray
    values: np.ndarray   # (m, k) embedding coordinates
    meta: dict = field(default_factory=dict)

    def to_record(self):
        return {"kind": self.kind, "ids": self.ids.tolist(),
                "values": self.values.tolist(), "meta": self.meta}


@dataclass
class IotaBracket:
    lower: float
    upper: float
    upper_witness: object

    def __post_init__(self):
        if self.lower > self.upper + 1e-9:
            raise AssertionError(
                f"iota bracket inverted: lower {self.lower} > upper {self.upper}")


def _map_objective(D, w, diameter, F, q):
    diff = F[:, None, :] - F[None, :, :]
    Df = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    err = np.abs(D - Df) / diameter
    if q == math.inf:
        return float(err.max())
    mu = w.sum()
    return float(((w @ err ** q @ w) / (mu * mu)) ** (1.0 / q))


def _classical_scaling(D, k):
    n = D.shape[0]
    J = np.eye(n) - np.ones((n, n)) / n
    B = -0.5 * J @ (D * D) @ J
    vals, vecs = np.linalg.eigh(B)
    vals = vals[::-1][:k]
    vecs = vecs[:, ::-1][:, :k]
    F = vecs * np.sqrt(np.maximum(vals, 0.0))
    # deterministic sign convention
    for col in range(F.shape[1]):
        nz = np.flatnonzero(np.abs(F[:, col]) > 1e-12)
        if nz.size and F[nz[0], col] < 0:
            F[:, col] = -F[:, col]
    return F


def _subgradient_refine(D, w, diameter, F0, q, iters, seed=0):
    rng = np.random.default_rng(seed)
    F = F0.copy()
    best = F0.copy()
    best_val = _map_objective(D, w, diameter, F0, q)
    mu = w.sum()
    for t in range(iters):
        diff = F[:, None, :] - F[None, :, :]
        Df = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        R = D - Df
        S = np.sign(R)
        denom = np.maximum(Df, 1e-12 * diameter)
        coef = (-S / denom) * (w[:, None] * w[None, :])
        G = (coef[:, :, None] * diff).sum(axis=1) / (mu * mu * diameter)
        gn = float(np.sqrt((G * G).sum()))
        if gn == 0.0:
            break
        step = 0.2 * diameter / math.sqrt(t + 1.0)
        F = F - step * G / gn
        val = _map_objective(D, w, diameter, F, q)
        if val < best_val:
            best_val = val
            best = F.copy()
    return best, best_val


def _scale_search(D, w, diameter, F, q):
    """Cheap norm search: optimal positive rescaling of the embedding."""
    best_s, best_val = 1.0, _map_objective(D, w, diameter, F, q)
    for s in np.geomspace(0.5, 2.0, 17):
        val = _map_objective(D, w, diameter, s * F, q)
        if val < best_val:
            best_val, best_s = val, float(s)
    return best_s, best_val


def iota_estimate(space, subset, q=1, k=1, n_anchor_pairs=8, use_chart=True,
                  use_mds=True, refine=True, refine_iters=200, seed=0,
                  exact_cap=EXACT_CAP, anchor_C=16.0) -> IotaBracket:
    """Two-sided iota bracket from candidate maps into R^k.

    Lower bound: kappa/3 for q = 1, k = 1 (0 otherwise).  Upper bound: the
    best exact L^q distortion objective over the candidate maps, each also
    given a scalar norm rescaling (the k = 1 norm infimum reduces to the
    Euclidean norm exactly; for k >= 2 the rescaling family keeps the result
    an honest upper bound).
    """
    ids = check_subset(space, subset)
    diameter = space_diam(space, ids)
    if diameter <= 0.0:
        raise DomainError("iota_estimate needs positive diameter")
    D, w = space.submatrix(ids)
    lower = 0.0
    if q == 1 and k == 1:
        lower = kappa(space, ids, exact_cap=exact_cap, seed=seed).raw / 3.0

    candidates = []
    if ids.size == 2:
        F = np.array([[0.0], [D[0, 1]]])
        candidates.append(CandidateMap("anchor", ids, np.pad(F, ((0, 0), (0, k - 1)))))
    else:
        for (p, qq) in menger.rank_anchor_pairs(space, ids, C=anchor_C, m=n_anchor_pairs):
            wit = menger.menger_map(space, p, qq, subset=ids)
            F = np.zeros((ids.size, k))
            F[:, 0] = wit.values
            candidates.append(CandidateMap("anchor", ids, F, {"anchors": (p, qq)}))
    if use_chart and space.ambient.kind == "euclidean" and k < space.ambient.dim:
        try:
            fit = planes.fit_plane_report(space, ids, k, 2)
            F = planes.chart_coords(fit.plane, space.coords[ids])
            candidates.append(CandidateMap("chart", ids, F, {"plane": "euclidean"}))
        except (DegenerateError, DomainError):
            pass
    if use_chart and space.ambient.kind == "heisenberg" and k <= space.ambient.dim:
        try:
            fit = heis.fit_hplane_report(space, ids, 2, k)
            F = heis.chart_coords_h(fit.plane, space.coords[ids])
            candidates.append(CandidateMap("chart", ids, F, {"plane": "horizontal"}))
        except (DegenerateError, DomainError):
            pass
    if use_mds:
        candidates.append(CandidateMap("mds", ids, _classical_scaling(D, k)))

    best = None
    best_val = math.inf
    for cand in candidates:
        scale, val = _scale_search(D, w, diameter, cand.values, q)
        if val < best_val:
            best_val = val
            best = CandidateMap(cand.kind, ids, scale * cand.values,
                                dict(cand.meta, scale=scale, norm="euclidean"))
    if refine and q == 1 and best is not None:
        F, val = _subgradient_refine(D, w, diameter, best.values, q, refine_iters, seed)
        if val < best_val:
            best_val = val
            best = CandidateMap("refined", ids, F, dict(best.meta, refined=True))
    return IotaBracket(lower, best_val, best)


# ---------------------------------------------------------------------------
# Coefficient functions for Carleson aggregation
# ---------------------------------------------------------------------------

@dataclass
class CoeffFn:
    tag: str
    fn: object

    def __call__(self, space, ids) -> CoefficientValue:
        return self.fn(space, ids)


def beta_fn(q, family) -> CoeffFn:
    label = "inf" if q == math.inf else q
    return CoeffFn(f"beta[q={label},{family}]",
                   lambda space, ids: beta(space, ids, q, family))


def kappa_fn(exact_cap=EXACT_CAP, mc_samples=100_000, seed=0) -> CoeffFn:
    return CoeffFn("kappa",
                   lambda space, ids: kappa(space, ids, exact_cap, mc_samples, seed))


def iota_fn(q, family) -> CoeffFn:
    """Projection iota with the best of the beta_q / beta_2q realizer planes."""
    label = "inf" if q == math.inf else q

    def compute(space, ids):
        kind, k = _parse_family(family)
        if kind == "euclidean":
            fits = [planes.fit_plane_report(space, ids, k, q),
                    planes.fit_plane_report(space, ids, k, min(2 * q, 1e9))]
            cands = [f.plane for f in fits]
        else:
            fits = [heis.fit_hplane_report(space, ids, q, k)]
            cands = [f.plane for f in fits]
        best = None
        for plane in cands:
            val = iota_plane(space, ids, q, plane)
            if best is None or val.raw < best.raw:
                best = val
        return best

    return CoeffFn(f"iota[q={label},{family}]", compute)
