"""Heisenberg group H^n with the Koranyi metric: horizontal planes,
projections, angles, Pythagoras-type checks, lifts, and embeddings.

Points are plain float arrays (x, t) of length 2n + 1.  Horizontal k-planes
are group translates of isotropic k-dimensional subspaces of R^{2n}; their
projections have an exact coordinate formula, and the distance from a point
to a plane is sandwiched between 2^{-5/4} and 1 times the distance to its
projection, so beta-type quantities here use the exact projection distance
(the sandwiched surrogate) while ``dist_to_hplane`` also runs a numeric
minimization over the plane chart and certifies the sandwich.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .core import check_subset, heis_omega, horizontal_lift  # noqa: F401 (lift re-export)
from .errors import AmbientError, DegenerateError, DomainError, PreconditionError

ISOTROPY_TOL = 1e-12
PROJ_SANDWICH = 2.0 ** (-5.0 / 4.0)


def heis_mul(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    x, t = p[:-1], p[-1]
    y, u = q[:-1], q[-1]
    return np.concatenate([x + y, [t + u + heis_omega(x, y)]])


def heis_inv(p):
    p = np.asarray(p, dtype=float)
    return -p


def koranyi_norm(p) -> float:
    p = np.asarray(p, dtype=float)
    x, t = p[:-1], p[-1]
    return float((float(x @ x) ** 2 + 16.0 * t * t) ** 0.25)


def koranyi_dist(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DomainError("Heisenberg points of different dimension")
    return koranyi_norm(heis_mul(heis_inv(p), q))


@dataclass(frozen=True)
class HorizontalPlane:
    """Affine horizontal k-plane q . (V' x {0}) with isotropic frame V'."""

    base: np.ndarray   # Heisenberg point, length 2n + 1
    frame: np.ndarray  # (k, 2n) orthonormal rows spanning the isotropic V'

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        frame = np.atleast_2d(np.asarray(self.frame, dtype=float))
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "frame", frame)
        k, two_n = frame.shape
        if two_n % 2 or base.shape != (two_n + 1,):
            raise DomainError("frame must have 2n columns and base 2n+1 coords")
        if k > two_n // 2:
            raise DomainError("isotropic subspaces have dimension at most n")
        gram = frame @ frame.T
        if np.max(np.abs(gram - np.eye(k))) > ISOTROPY_TOL:
            raise DomainError("horizontal frame not orthonormal to 1e-12")
        m = two_n // 2
        sympl = 0.5 * (frame[:, :m] @ frame[:, m:].T - frame[:, m:] @ frame[:, :m].T)
        if np.max(np.abs(sympl)) > ISOTROPY_TOL:
            raise DomainError("frame is not isotropic to 1e-12")

    @property
    def k(self) -> int:
        return self.frame.shape[0]

    @property
    def n(self) -> int:
        return self.frame.shape[1] // 2


def horiz_project(plane: HorizontalPlane, p):
    """P_V(p) = (v + [q], t_q + omega([q], v)), v the projection of [p]-[q]."""
    p = np.asarray(p, dtype=float)
    q = plane.base
    v = ((p[:-1] - q[:-1]) @ plane.frame.T) @ plane.frame
    return np.concatenate([v + q[:-1], [q[-1] + heis_omega(q[:-1], v)]])


def horiz_project_many(plane: HorizontalPlane, P):
    P = np.asarray(P, dtype=float)
    q = plane.base
    V = ((P[:, :-1] - q[:-1]) @ plane.frame.T) @ plane.frame
    x = q[:-1]
    m = x.shape[0] // 2
    om = 0.5 * (V[:, m:] @ x[:m] - V[:, :m] @ x[m:])
    out = np.empty_like(P)
    out[:, :-1] = V + x
    out[:, -1] = q[-1] + om
    return out


def chart_coords_h(plane: HorizontalPlane, P):
    """Frame coordinates of the horizontal projections (isometric chart)."""
    P = np.asarray(P, dtype=float)
    return (P[:, :-1] - plane.base[:-1]) @ plane.frame.T


def proj_dist(plane: HorizontalPlane, p) -> float:
    """d(p, P_V(p)): exact, and within [1, 2^{5/4}] of the true d(p, V)."""
    return koranyi_dist(p, horiz_project(plane, p))


def proj_dist_many(plane: HorizontalPlane, P):
    P = np.asarray(P, dtype=float)
    q = plane.base
    rel = P[:, :-1] - q[:-1]
    V = (rel @ plane.frame.T) @ plane.frame
    dx = V - rel  # planar residual, no +base round trip
    x = P[:, :-1]
    proj_planar = V + q[:-1]
    m = x.shape[1] // 2
    om = 0.5 * (np.einsum("ij,ij->i", x[:, :m], proj_planar[:, m:])
                - np.einsum("ij,ij->i", x[:, m:], proj_planar[:, :m]))
    om_base = 0.5 * (V[:, m:] @ q[:m] - V[:, :m] @ q[m:2 * m])
    tau = q[-1] + om_base - P[:, -1] - om
    sq = np.einsum("ij,ij->i", dx, dx)
    return (sq * sq + 16.0 * tau * tau) ** 0.25


@dataclass
class HPlaneDistance:
    value: float  # numeric minimum over the plane chart
    lower: float  # 2^{-5/4} d(p, P_V(p))
    upper: float  # d(p, P_V(p))


def dist_to_hplane(plane: HorizontalPlane, p, starts=5, seed=0) -> HPlaneDistance:
    """Numeric min of d(p, .) over the plane, with the projection sandwich.

    Hard postcondition: the numeric value lies inside
    [2^{-5/4} d(p, P_V(p)), d(p, P_V(p))] up to 1e-6.
    """
    p = np.asarray(p, dtype=float)
    upper = proj_dist(plane, p)
    lower = PROJ_SANDWICH * upper
    if upper == 0.0:
        return HPlaneDistance(0.0, 0.0, 0.0)
    q = plane.base

    def point_at(s):
        v = s @ plane.frame
        return np.concatenate([v + q[:-1], [q[-1] + heis_omega(q[:-1], v)]])

    def objective(s):
        return koranyi_dist(p, point_at(s))

    s0 = plane.frame @ (p[:-1] - q[:-1])
    rng = np.random.default_rng(seed)
    best = objective(s0)
    for i in range(starts):
        init = s0 if i == 0 else s0 + rng.normal(scale=0.7 * upper, size=s0.shape)
        res = minimize(objective, init, method="Nelder-Mead",
                       options={"maxiter": 400, "xatol": 1e-12, "fatol": 1e-14})
        best = min(best, float(res.fun))
    if not (lower - 1e-6 * max(1.0, upper) <= best <= upper + 1e-6 * max(1.0, upper)):
        raise AssertionError(
            f"numeric plane distance {best} escaped sandwich [{lower}, {upper}]")
    return HPlaneDistance(best, lower, upper)


def angle_heis(v1: HorizontalPlane, v2: HorizontalPlane) -> float:
    """Angle of horizontal planes = Euclidean angle of the isotropic frames."""
    if v1.k != v2.k:
        raise DomainError("angle requires equal plane dimension")
    svals = np.linalg.svd(v1.frame @ v2.frame.T, compute_uv=False)
    c = min(float(svals.min()), 1.0)
    return math.sqrt(max(0.0, 1.0 - c * c))


# ---------------------------------------------------------------------------
# Pythagoras-type checks (constants calibrated, then frozen by the caller)
# ---------------------------------------------------------------------------

def _gate(plane, p1, p2, c):
    d12 = koranyi_dist(p1, p2)
    if d12 == 0.0:
        raise DomainError("p1 and p2 must differ")
    d1 = proj_dist(plane, p1)
    d2 = proj_dist(plane, p2)
    if max(d1, d2) > c * d12:
        raise PreconditionError(
            f"distance gate fails: max(d1, d2) = {max(d1, d2):.3e} > c*d12 = {c * d12:.3e}")
    return d12, d1, d2


def heis_pythagoras_required_N(plane: HorizontalPlane, p1, p2, c) -> float:
    """Smallest N making the single-plane Pythagoras residual nonpositive."""
    d12, d1, d2 = _gate(plane, p1, p2, c)
    dproj = koranyi_dist(horiz_project(plane, p1), horiz_project(plane, p2))
    gap = d12 * d12 - dproj * dproj
    if gap <= 0.0 or (d1 + d2) == 0.0:
        return 0.0
    return gap / ((1.0 + c * c) * (d1 + d2) ** 2)


def heis_pythagoras_check(plane: HorizontalPlane, p1, p2, c, N) -> float:
    """Residual d12^2 - dproj^2 - N (1+c^2)(d1+d2)^2; <= 0 once N is calibrated."""
    d12, d1, d2 = _gate(plane, p1, p2, c)
    dproj = koranyi_dist(horiz_project(plane, p1), horiz_project(plane, p2))
    return d12 * d12 - dproj * dproj - N * (1.0 + c * c) * (d1 + d2) ** 2


def heis_two_plane_required_N(v: HorizontalPlane, w: HorizontalPlane, x, y, c) -> float:
    """Smallest N0 making the two-plane Pythagoras residual nonpositive."""
    d12, d1, d2 = _gate(v, x, y, c)
    dW = koranyi_dist(horiz_project(w, x), horiz_project(w, y))
    ratio = min(dW / d12, 1.0)
    need = math.sqrt(max(0.0, 1.0 - ratio * ratio))
    ang = angle_heis(v, w)
    if need <= ang or (d1 + d2) == 0.0:
        return 0.0
    return (need - ang) * d12 / ((1.0 + c) * (d1 + d2))


def heis_two_plane_check(v: HorizontalPlane, w: HorizontalPlane, x, y, c, N0) -> float:
    """Residual of the two-planes inequality with calibrated N0 (<= 0 after)."""
    d12, d1, d2 = _gate(v, x, y, c)
    dW = koranyi_dist(horiz_project(w, x), horiz_project(w, y))
    bound = d12 * (angle_heis(v, w) + N0 * (1.0 + c) * (d1 + d2) / d12)
    return d12 * d12 - dW * dW - bound * bound


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------

def symplectic_orthonormalize(rows):
    """Gram-Schmidt sweep that also removes symplectic components.

    Produces an orthonormal frame with pairwise vanishing omega; raises
    DegenerateError when the input does not leave enough room.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    k, two_n = rows.shape
    m = two_n // 2
    out = []
    killers = []  # accumulated directions to project away

    def jvec(u):
        return np.concatenate([u[m:], -u[:m]])

    for v in rows:
        u = v.copy()
        for w in killers:
            u -= (u @ w) * w
        norm = np.linalg.norm(u)
        if norm < 1e-10:
            raise DegenerateError("symplectic orthonormalization collapsed")
        u /= norm
        out.append(u)
        killers.append(u)
        ju = jvec(u)
        ju -= sum((ju @ w) * w for w in killers)
        jn = np.linalg.norm(ju)
        if jn > 1e-10:
            killers.append(ju / jn)
    return np.array(out)


@dataclass
class HPlaneFit:
    plane: HorizontalPlane
    value: float
    baseline: float
    slack: float
    flagged: bool
    approximate: bool  # True for k >= 2 (penalized-isotropy fitting)


def _hbeta_value(P, w, diameter, plane, q):
    d = proj_dist_many(plane, P) / diameter
    if q == math.inf:
        return float(d.max())
    mu = w.sum()
    return float(((w @ d ** q) / mu) ** (1.0 / q))


def fit_hplane_report(space, subset, q=2, k=1, starts=6, nm_iters=400,
                      baseline_budget=120, seed=0) -> HPlaneFit:
    """Fit an affine horizontal k-plane minimizing the beta objective.

    k = 1 directions are automatically isotropic; k >= 2 uses an isotropy
    penalty with a final symplectic re-projection and is flagged approximate.
    """
    if space.ambient.kind != "heisenberg":
        raise AmbientError("fit_hplane needs a heisenberg ambient")
    ids = check_subset(space, subset)
    if ids.size < 2:
        raise DomainError("need at least 2 points")
    P = space.coords[ids]
    w = space.weights[ids]
    D = space.D[np.ix_(ids, ids)]
    diameter = float(D.max())
    if diameter == 0.0:
        raise DegenerateError("all points equal")
    two_n = P.shape[1] - 1
    m = two_n // 2
    if k > m:
        raise DomainError("k exceeds the isotropic dimension bound n")
    rng = np.random.default_rng(seed)
    mu = w.sum()
    planar_bar = (w[:, None] * P[:, :-1]).sum(axis=0) / mu
    t_bar = float((w * P[:, -1]).sum() / mu)

    # principal planar direction(s) as initial frame
    Xc = P[:, :-1] - planar_bar
    M = (Xc * w[:, None]).T @ Xc
    vals, vecs = np.linalg.eigh(M)
    init_frame = vecs[:, ::-1][:, :k].T

    def make_plane(theta):
        frame = theta[: k * two_n].reshape(k, two_n)
        if k == 1:
            nrm = np.linalg.norm(frame)
            if nrm < 1e-12:
                return None
            frame = frame / nrm
        else:
            try:
                frame = symplectic_orthonormalize(frame)
            except DegenerateError:
                return None
        base = theta[k * two_n:]
        try:
            return HorizontalPlane(base, frame)
        except DomainError:
            return None

    def objective(theta):
        plane = make_plane(theta)
        if plane is None:
            return 1e6
        val = _hbeta_value(P, w, diameter, plane, q)
        if k >= 2:
            raw = theta[: k * two_n].reshape(k, two_n)
            sympl = 0.5 * (raw[:, :m] @ raw[:, m:].T - raw[:, m:] @ raw[:, :m].T)
            val += 1e-6 * float(np.abs(sympl).sum())  # mild pull toward isotropy
        return val

    base0 = np.concatenate([planar_bar, [t_bar]])
    theta0 = np.concatenate([init_frame.ravel(), base0])
    best_theta, best_val = theta0, objective(theta0)
    for s in range(starts):
        init = theta0.copy()
        if s > 0:
            init[: k * two_n] += rng.normal(scale=0.5, size=k * two_n)
            init[k * two_n:] += rng.normal(scale=0.3 * diameter, size=two_n + 1)
        res = minimize(objective, init, method="Nelder-Mead",
                       options={"maxiter": nm_iters, "xatol": 1e-10, "fatol": 1e-12})
        if res.fun < best_val:
            best_val, best_theta = float(res.fun), res.x
    plane = make_plane(best_theta)
    value = _hbeta_value(P, w, diameter, plane, q)

    # seeded random-search baseline
    best_b, bplane = math.inf, None
    for _ in range(baseline_budget):
        frame = rng.normal(size=(k, two_n))
        try:
            frame = (frame / np.linalg.norm(frame) if k == 1
                     else symplectic_orthonormalize(frame))
        except DegenerateError:
            continue
        anchor = P[int(rng.integers(0, P.shape[0]))]
        cand = HorizontalPlane(anchor, np.atleast_2d(frame))
        val = _hbeta_value(P, w, diameter, cand, q)
        if val < best_b:
            best_b, bplane = val, cand
    if best_b < value:
        plane, value = bplane, best_b
    slack = value / best_b if best_b > 0 else 1.0
    return HPlaneFit(plane, value, best_b, slack,
                     flagged=value > 2.0 * best_b, approximate=k >= 2)


def fit_hplane(space, subset, q=2, k=1, **kw) -> HorizontalPlane:
    return fit_hplane_report(space, subset, q, k, **kw).plane


# ---------------------------------------------------------------------------
# Embeddings
# ---------------------------------------------------------------------------

def embed_h1_to_hn(p, n):
    """Isometric embedding H^1 -> H^n: (x, y, t) -> (x, 0..; y, 0.., t)."""
    p = np.asarray(p, dtype=float)
    if p.shape != (3,):
        raise DomainError("expected an H^1 point (3 coordinates)")
    out = np.zeros(2 * n + 1)
    out[0] = p[0]
    out[n] = p[1]
    out[-1] = p[2]
    return out


def embed_r2_to_hn(x, n):
    """Isometric embedding R^2 -> H^n (isometric for n > 1): x -> (x1, x2, 0..)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise DomainError("expected a planar point")
    out = np.zeros(2 * n + 1)
    out[0] = x[0]
    out[1] = x[1]
    return out


# ---------------------------------------------------------------------------
# Independent points and tilting
# ---------------------------------------------------------------------------

@dataclass
class HIndependentPoints:
    ids: np.ndarray
    score: float
    degenerate: bool


def heis_independent_points(space, subset, k, seed=0) -> HIndependentPoints:
    """Greedy picks maximizing distance to fitted horizontal planes through
    the previously chosen points (0-plane convention: the point itself)."""
    if space.ambient.kind != "heisenberg":
        raise AmbientError("needs a heisenberg ambient")
    ids = check_subset(space, subset)
    if ids.size < k + 1:
        raise DomainError(f"need at least {k + 1} points")
    P = space.coords[ids]
    w = space.weights[ids]
    D = space.D[np.ix_(ids, ids)]
    diameter = float(D.max())
    if diameter == 0.0:
        return HIndependentPoints(ids[:k + 1], 0.0, True)
    chosen = [int(np.argmax(w))]
    score = math.inf
    rng = np.random.default_rng(seed)
    for step in range(k):
        if step == 0:
            dists = D[chosen[0]].copy()
        else:
            plane = _fit_through(P[chosen], step, rng)
            dists = proj_dist_many(plane, P)
        dists[chosen] = -1.0
        nxt = int(np.argmax(dists))
        score = min(score, float(dists[nxt]) / diameter)
        chosen.append(nxt)
    return HIndependentPoints(ids[chosen], score, degenerate=score <= 1e-12)


def _fit_through(points, k, rng, tries=40):
    """Best horizontal k-plane through the first point, near the others."""
    base = points[0]
    two_n = base.shape[0] - 1
    best, best_val = None, math.inf
    planar = points[:, :-1] - base[:-1]
    u, s, vt = np.linalg.svd(planar, full_matrices=False)
    for i in range(tries):
        raw = vt[:k] if i == 0 else rng.normal(size=(k, two_n))
        try:
            frame = (raw / np.linalg.norm(raw) if k == 1
                     else symplectic_orthonormalize(raw))
        except DegenerateError:
            continue
        try:
            plane = HorizontalPlane(base, np.atleast_2d(frame))
        except DomainError:
            continue
        val = float(proj_dist_many(plane, points).max())
        if val < best_val:
            best, best_val = plane, val
    return best


def heis_tilting_ratio(system, q1, q0, lam1, lam0, q=1, k=1) -> float:
    """Heisenberg tilting ratio with horizontal realizers; 0/0 -> 0."""
    if not (0 <= q1.level - q0.level <= 1):
        raise PreconditionError("levels must satisfy level(Q1) - level(Q0) in {0, 1}")
    s1 = system.enlarge(q1, lam1)
    s0 = system.enlarge(q0, lam0)
    if not np.all(np.isin(s1, s0)):
        raise PreconditionError("lam1*Q1 not contained in lam0*Q0")
    space = system.space
    if (s1.size < 2 or s0.size < 2
            or space.D[np.ix_(s1, s1)].max() == 0 or space.D[np.ix_(s0, s0)].max() == 0):
        return 0.0  # degenerate enlargement: 0/0 convention
    f1 = fit_hplane_report(space, s1, q, k)
    f0 = fit_hplane_report(space, s0, q, k)
    denom = lam0 ** (k + 1) * (f1.value + f0.value)
    if denom <= 1e-14:
        return 0.0
    return angle_heis(f1.plane, f0.plane) / denom
