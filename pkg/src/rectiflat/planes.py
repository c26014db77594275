"""Affine k-planes in R^n: fitting, projections, angles, independence.

Angles between equidimensional planes are computed as the sine of the
largest principal angle of the direction spaces (via singular values of the
frame cross product); this equals the Hausdorff distance between the unit
balls of the parallel translates, and a sampled-Hausdorff oracle validates
the identification in the test suite instead of assuming it silently.

Plane fitting is exact weighted least squares for q = 2 and a deterministic
multi-start local search otherwise; an internal seeded random-search
baseline is always evaluated so that fits can be certified 2-approximate
realizers (the slack is recorded, and fits worse than twice the baseline
are flagged).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .core import check_subset
from .errors import AmbientError, DegenerateError, DomainError, PreconditionError

FRAME_TOL = 1e-12


def orthonormal_rows(mat):
    """Orthonormalize the rows of ``mat`` (QR on the transpose)."""
    q, r = np.linalg.qr(np.asarray(mat, dtype=float).T)
    # fix signs so the map is deterministic and orientation-stable
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return (q * signs).T


@dataclass(frozen=True)
class AffinePlane:
    base: np.ndarray   # point in R^n
    frame: np.ndarray  # (k, n) orthonormal direction rows

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        frame = np.atleast_2d(np.asarray(self.frame, dtype=float))
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "frame", frame)
        k, n = frame.shape
        if k > n or base.shape != (n,):
            raise DomainError(f"bad plane shape: frame {frame.shape}, base {base.shape}")
        gram = frame @ frame.T
        if np.max(np.abs(gram - np.eye(k))) > FRAME_TOL:
            raise DomainError("plane frame is not orthonormal to 1e-12")

    @property
    def k(self) -> int:
        return self.frame.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.frame.shape[1]


def project(plane: AffinePlane, x):
    """Orthogonal projection onto the plane (idempotent, 1-Lipschitz)."""
    x = np.asarray(x, dtype=float)
    rel = x - plane.base
    return plane.base + (rel @ plane.frame.T) @ plane.frame


def dist_to_plane(plane: AffinePlane, x) -> float:
    x = np.asarray(x, dtype=float)
    rel = x - plane.base
    resid = rel - (rel @ plane.frame.T) @ plane.frame
    return float(np.linalg.norm(resid))


def project_many(plane: AffinePlane, X):
    X = np.asarray(X, dtype=float)
    rel = X - plane.base
    return plane.base + (rel @ plane.frame.T) @ plane.frame


def dists_to_plane(plane: AffinePlane, X):
    # residual computed without the +base round trip, so points on an
    # axis-aligned plane report an exact zero distance
    X = np.asarray(X, dtype=float)
    rel = X - plane.base
    resid = rel - (rel @ plane.frame.T) @ plane.frame
    return np.linalg.norm(resid, axis=-1)


def chart_coords(plane: AffinePlane, X):
    """Coordinates of the projections in the plane's orthonormal frame."""
    X = np.asarray(X, dtype=float)
    return (X - plane.base) @ plane.frame.T


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------

def _beta_value(X, w, diameter, plane, q):
    d = dists_to_plane(plane, X) / diameter
    if q == math.inf:
        return float(d.max())
    mu = w.sum()
    return float(((w @ d ** q) / mu) ** (1.0 / q))


@dataclass
class PlaneFit:
    plane: AffinePlane
    value: float            # beta_{q,V} of the fitted plane
    baseline: float         # best value found by the internal random search
    slack: float            # value / max(baseline, tiny)
    flagged: bool           # True when the baseline beats the fit by > 2x


def _pca_plane(X, w, k) -> AffinePlane:
    mu = w.sum()
    bar = (w[:, None] * X).sum(axis=0) / mu
    Xc = X - bar
    M = (Xc * w[:, None]).T @ Xc
    vals, vecs = np.linalg.eigh(M)
    frame = vecs[:, ::-1][:, :k].T  # top-k directions
    return AffinePlane(bar, orthonormal_rows(frame))


def _random_plane_search(X, w, diameter, k, q, budget, seed):
    """Seeded random-search baseline; per-direction offsets chosen for q."""
    d = X.shape[1]
    rng = np.random.default_rng(seed)
    mu = w.sum()
    bar = (w[:, None] * X).sum(axis=0) / mu
    best_val = math.inf
    best = None
    for _ in range(budget):
        frame = orthonormal_rows(rng.normal(size=(k, d)))
        comp = orthonormal_rows(_complement(frame))
        y = (X - bar) @ comp.T  # normal coordinates, (m, d-k)
        if q == 2:
            t = (w @ y) / mu
        elif q == math.inf:
            t = 0.5 * (y.max(axis=0) + y.min(axis=0))
        else:
            t = _weighted_median_cols(y, w)
        base = bar + t @ comp
        plane = AffinePlane(base, frame)
        val = _beta_value(X, w, diameter, plane, q)
        if val < best_val:
            best_val = val
            best = plane
    return best, best_val


def _complement(frame):
    k, d = frame.shape
    full = np.vstack([frame, np.eye(d)])
    q, _ = np.linalg.qr(full.T)
    return q[:, k:d].T


def _weighted_median_cols(y, w):
    out = np.empty(y.shape[1])
    half = w.sum() / 2.0
    for j in range(y.shape[1]):
        order = np.argsort(y[:, j], kind="stable")
        csum = np.cumsum(w[order])
        out[j] = y[order[np.searchsorted(csum, half)], j]
    return out


def fit_plane_report(space, subset, k, q=2, starts=4, nm_iters=300,
                     baseline_budget=200, seed=0) -> PlaneFit:
    """Fit an affine k-plane minimizing beta_{q,V} over the subset."""
    if space.ambient.kind != "euclidean":
        raise AmbientError("fit_plane needs a euclidean ambient")
    ids = check_subset(space, subset)
    if ids.size < 2:
        raise DomainError("plane fitting needs at least 2 points")
    X = space.coords[ids]
    w = space.weights[ids]
    if float(np.max(np.abs(X - X[0]))) == 0.0:
        raise DegenerateError("all points equal; no plane to fit")
    d = X.shape[1]
    if k >= d:
        raise DomainError(f"need k < ambient dim ({k} >= {d})")
    diameter = float(np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1)).max())

    pca = _pca_plane(X, w, k)
    if q == 2:
        # weighted PCA is the exact minimizer of the L^2 objective; the
        # random-search baseline cannot beat it, so it is skipped
        value = _beta_value(X, w, diameter, pca, 2)
        return PlaneFit(pca, value, value, 1.0, flagged=False)
    plane, value = _refine_plane(X, w, diameter, pca, q, starts, nm_iters, seed)
    bplane, baseline = _random_plane_search(X, w, diameter, k, q, baseline_budget, seed + 1)
    if baseline < value:
        # random search found a better plane; adopt it (keeps the 2x contract)
        plane, value = bplane, baseline
    slack = value / baseline if baseline > 0 else 1.0
    return PlaneFit(plane, value, baseline, slack, flagged=value > 2.0 * baseline)


def _refine_plane(X, w, diameter, init: AffinePlane, q, starts, nm_iters, seed):
    d = X.shape[1]
    k = init.k
    comp0 = orthonormal_rows(_complement(init.frame))
    rng = np.random.default_rng(seed)
    scale = 0.3

    def unpack(theta):
        df = theta[: k * d].reshape(k, d)
        dt = theta[k * d :]
        frame = orthonormal_rows(init.frame + df)
        base = init.base + dt @ comp0 * diameter
        return AffinePlane(base, frame)

    def objective(theta):
        return _beta_value(X, w, diameter, unpack(theta), q)

    best_val = objective(np.zeros(k * d + (d - k)))
    best_theta = np.zeros(k * d + (d - k))
    for s in range(starts):
        theta0 = (np.zeros(k * d + (d - k)) if s == 0
                  else rng.normal(scale=scale, size=k * d + (d - k)))
        res = minimize(objective, theta0, method="Nelder-Mead",
                       options={"maxiter": nm_iters, "xatol": 1e-10, "fatol": 1e-12})
        if res.fun < best_val:
            best_val = float(res.fun)
            best_theta = res.x
    return unpack(best_theta), best_val


def fit_plane(space, subset, k, q=2, **kw) -> AffinePlane:
    return fit_plane_report(space, subset, k, q, **kw).plane


# ---------------------------------------------------------------------------
# Angles and the two-planes Pythagorean check
# ---------------------------------------------------------------------------

def angle_euclid(v1: AffinePlane, v2: AffinePlane) -> float:
    """sin of the largest principal angle between the direction spaces."""
    if v1.k != v2.k:
        raise DomainError("angle requires planes of equal dimension")
    svals = np.linalg.svd(v1.frame @ v2.frame.T, compute_uv=False)
    c = min(float(svals.min()), 1.0)
    return math.sqrt(max(0.0, 1.0 - c * c))


def sampled_hausdorff_angle(v1: AffinePlane, v2: AffinePlane, samples=2000, seed=0) -> float:
    """Hausdorff distance of unit-ball slices; slow oracle for angle_euclid."""
    rng = np.random.default_rng(seed)
    out = 0.0
    for a, b in ((v1, v2), (v2, v1)):
        k = a.k
        u = rng.normal(size=(samples, k))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        vecs = u @ a.frame
        proj = (vecs @ b.frame.T) @ b.frame  # nearest point of the ball slice
        norms = np.linalg.norm(proj, axis=1)
        clip = np.minimum(1.0, 1.0 / np.maximum(norms, 1e-300))
        dist = np.linalg.norm(vecs - proj * clip[:, None], axis=1)
        out = max(out, float(dist.max()))
    return out


def two_plane_pythagoras_check(v1: AffinePlane, v2: AffinePlane, x, y) -> float:
    """Residual of the two-planes Pythagorean inequality (guaranteed <= 0)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.array_equal(x, y):
        raise DomainError("x and y must differ")
    if v1.k != v2.k:
        raise DomainError("planes must have equal dimension")
    dxy = float(np.linalg.norm(x - y))
    pxy = float(np.linalg.norm(project(v2, x) - project(v2, y)))
    bound = dxy * angle_euclid(v1, v2) + dist_to_plane(v1, y) + dist_to_plane(v1, x)
    return dxy ** 2 - pxy ** 2 - bound ** 2


# ---------------------------------------------------------------------------
# Independent points and the small-angle criterion
# ---------------------------------------------------------------------------

@dataclass
class IndependentPoints:
    ids: np.ndarray
    score: float
    degenerate: bool


def _dist_to_affine_span(points, x):
    """Distance from x to the affine span of the given points."""
    base = points[0]
    rel = points[1:] - base
    if rel.shape[0] == 0:
        return float(np.linalg.norm(x - base))
    q, r = np.linalg.qr(rel.T, mode="reduced")
    keep = np.abs(np.diag(r)) > 1e-13 * max(1.0, np.abs(np.diag(r)).max())
    q = q[:, keep]
    v = x - base
    return float(np.linalg.norm(v - q @ (q.T @ v)))


def independent_points(space, subset, k) -> IndependentPoints:
    """Greedy spanning chain: max-weight start, then farthest-from-span picks."""
    if space.ambient.kind != "euclidean":
        raise AmbientError("independent_points needs a euclidean ambient")
    ids = check_subset(space, subset)
    if ids.size < k + 1:
        raise DomainError(f"need at least {k + 1} points")
    X = space.coords[ids]
    w = space.weights[ids]
    diameter = float(np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1)).max())
    if diameter == 0.0:
        return IndependentPoints(ids[:k + 1], 0.0, True)
    chosen = [int(np.argmax(w))]
    score = math.inf
    for _ in range(k):
        dists = np.array([_dist_to_affine_span(X[chosen], X[i]) for i in range(len(ids))])
        dists[chosen] = -1.0
        nxt = int(np.argmax(dists))
        score = min(score, float(dists[nxt]) / diameter)
        chosen.append(nxt)
    return IndependentPoints(ids[chosen], score, degenerate=score <= 1e-12)


def _min_width_directions(xi, seed=0):
    """Half the minimal width of a k-dim point cloud over directions."""
    m, k = xi.shape
    if k == 1:
        return 0.5 * float(xi.max() - xi.min())

    def width(u):
        proj = xi @ u
        return 0.5 * float(proj.max() - proj.min())

    best = math.inf
    if k == 2:
        for ang in np.linspace(0.0, math.pi, 1441):
            best = min(best, width(np.array([math.cos(ang), math.sin(ang)])))
        return best
    rng = np.random.default_rng(seed)
    for s in range(24):
        u0 = rng.normal(size=k)
        u0 /= np.linalg.norm(u0)
        res = minimize(lambda v: width(v / np.linalg.norm(v)), u0,
                       method="Nelder-Mead", options={"maxiter": 400})
        best = min(best, float(res.fun))
    return best


def independence_score(points, k=None, seed=0) -> float:
    """min over (k-1)-dim affine subspaces W of span of max_i d(x_i, W)/diam.

    Computed as half the minimal width of the cloud inside its affine span;
    the optimization is multi-start, so the value is an upper bound of the
    true minimum (exact for k <= 2).
    """
    X = np.asarray(points, dtype=float)
    diameter = float(np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1)).max())
    if diameter == 0.0:
        return 0.0
    base = X[0]
    rel = X - base
    u, s, vt = np.linalg.svd(rel, full_matrices=False)
    rank = int((s > 1e-12 * s.max()).sum()) if s.size else 0
    if k is None:
        k = rank
    if rank < k:
        return 0.0
    xi = rel @ vt[:k].T
    return _min_width_directions(xi, seed=seed) / diameter


def small_angle_bound(v1: AffinePlane, v2: AffinePlane, ys, c, eps, seed=0) -> float:
    """Ratio angle/eps under the small-angle criterion's hypotheses.

    Preconditions: the y_i lie on v1, are independent at scale c (half the
    minimal width of the cloud exceeds c times its diameter), and projection
    onto v2 contracts no pair by more than the 1/(1+eps^2) factor.
    """
    ys = np.asarray(ys, dtype=float)
    k = v1.k
    if v2.k != k:
        raise DomainError("planes must have equal dimension")
    if ys.shape[0] != k + 1:
        raise PreconditionError(f"need k+1 = {k + 1} points, got {ys.shape[0]}")
    r = float(np.sqrt(((ys[:, None] - ys[None]) ** 2).sum(-1)).max())
    if r == 0.0:
        raise PreconditionError("coincident points")
    on_plane = max(dist_to_plane(v1, y) for y in ys)
    if on_plane > 1e-9 * max(r, 1.0):
        raise PreconditionError(f"points not on the first plane (off by {on_plane:.2e})")
    if independence_score(ys, k=k, seed=seed) <= c:
        raise PreconditionError("independence condition fails: width <= c * r")
    proj = project_many(v2, ys)
    for i in range(len(ys)):
        for j in range(i + 1, len(ys)):
            lhs = float(((ys[i] - ys[j]) ** 2).sum())
            rhs = (1.0 + eps * eps) * float(((proj[i] - proj[j]) ** 2).sum())
            if lhs > rhs * (1.0 + 1e-12):
                raise PreconditionError("close-projection condition fails")
    return angle_euclid(v1, v2) / eps


def euclid_tilting_ratio(system, q1, q0, lam1, lam0, q=1, k=1) -> float:
    """Angle between realizing planes over the beta-sum tilting bound.

    Zero-over-zero configurations return 0 by convention and are excluded
    from calibration maxima.
    """
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
    f1 = fit_plane_report(space, s1, k, q)
    f0 = fit_plane_report(space, s0, k, q)
    denom = lam0 ** (k + 1) * (f1.value + f0.value)
    if denom <= 1e-14:
        return 0.0
    return angle_euclid(f1.plane, f0.plane) / denom
