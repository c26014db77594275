"""Quantified embeddings into the line: anchor selection, sign maps,
distortion certificates, and the four-point / circularity machinery.

The sign map pins f(P) = 0, f(Q) = d(P, Q) and sends any other point x to
-d(x, P) when x lies "beyond P as seen from Q" (the betweenness test
[xPQ], i.e. d(x, Q) >= max(d(P, Q), d(x, P))) and to +d(x, P) otherwise.
Anchors P, Q are chosen to maximize distance among pairs whose excess
functionals pass the Markov-type admissibility thresholds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import check_subset
from .errors import DomainError, InvariantViolation, PreconditionError

BETWEEN_TOL = 1e-9


def triple_excess_sides(a, b, c) -> float:
    return max(0.0, a + b + c - 2.0 * max(a, b, c))


def set_excess(space, ids) -> float:
    """max triangular excess over all triples of the set."""
    ids = check_subset(space, ids)
    if ids.size < 3:
        return 0.0
    D, w = space.submatrix(ids)
    if ids.size <= 48:
        best = 0.0
        for i, j, k in itertools.combinations(range(ids.size), 3):
            best = max(best, triple_excess_sides(D[i, j], D[j, k], D[i, k]))
        return best
    return kernels.excess_sum_max(D, w)[1]


def between(space, x, y, z, tol=BETWEEN_TOL) -> bool:
    """[xyz]: y lies metrically between x and z (max-side characterization)."""
    return space.dist(x, z) >= max(space.dist(x, y), space.dist(y, z)) - tol


@dataclass
class EmbeddingWitness:
    ids: np.ndarray       # point ids the map is defined on
    values: np.ndarray    # f(x) per id
    anchors: tuple        # (P, Q) global point ids
    l1_distortion: float  # mu x mu average of ||f(x)-f(y)| - d(x,y)| / diam
    linf_distortion: float

    def to_record(self):
        return {
            "ids": self.ids.tolist(),
            "values": self.values.tolist(),
            "anchors": list(self.anchors),
            "l1_distortion": self.l1_distortion,
            "linf_distortion": self.linf_distortion,
        }


def _distortions(D, w, values, diameter):
    df = np.abs(values[:, None] - values[None, :])
    err = np.abs(df - D)
    linf = float(err.max())
    if diameter <= 0:
        return 0.0, linf
    mu = w.sum()
    l1 = float(w @ err @ w) / (mu * mu * diameter)
    return l1, linf


def menger_map(space, p: int, q: int, subset=None) -> EmbeddingWitness:
    """Sign map anchored at P, Q with exact distortion certificates."""
    if p == q:
        raise DomainError("anchors must be distinct")
    ids = space.all_ids() if subset is None else check_subset(space, subset)
    if p not in ids or q not in ids:
        raise DomainError("anchors must belong to the subset")
    D, w = space.submatrix(ids)
    pi = int(np.flatnonzero(ids == p)[0])
    qi = int(np.flatnonzero(ids == q)[0])
    dpq = D[pi, qi]
    if dpq == 0.0:
        raise DomainError("anchors at zero distance")
    dP = D[pi]
    dQ = D[qi]
    sign = np.where(dQ >= np.maximum(dpq, dP), -1.0, 1.0)
    values = sign * dP
    values[pi] = 0.0
    values[qi] = dpq
    l1, linf = _distortions(D, w, values, float(D.max()))
    return EmbeddingWitness(ids, values, (p, q), l1, linf)


@dataclass
class AnchorSelection:
    p: int
    q: int
    fallback: bool        # True when no pair passed the thresholds
    kappa: float          # normalized global triple excess of the subset
    point_functional: np.ndarray  # A1 per subset position
    pair_functional: float        # A2 of the selected pair


def _anchor_functionals(D, w):
    mu = float(w.sum())
    diameter = float(D.max())
    if diameter == 0.0:
        return 0.0, np.zeros(len(w)), np.zeros((len(w), len(w))), mu, diameter
    total, _ = kernels.excess_sum_max(D, w)
    kap = total / (mu ** 3 * diameter)
    a1 = kernels.excess_through_points(D, w) / (diameter * mu * mu)
    a2 = kernels.excess_through_pairs(D, w) / (diameter * mu)
    return kap, a1, a2, mu, diameter


def select_anchors(space, C: float = 16.0, subset=None) -> AnchorSelection:
    """Max-distance pair among pairs passing the excess-functional thresholds.

    A pair (P, Q) is admissible when A1(P) <= C kappa, A1(Q) <= C kappa and
    A2(P, Q) <= C kappa; if no pair is admissible the max-distance pair is
    returned with ``fallback=True``.
    """
    ids = space.all_ids() if subset is None else check_subset(space, subset)
    if ids.size < 2:
        raise DomainError("anchor selection needs at least 2 points")
    D, w = space.submatrix(ids)
    kap, a1, a2, mu, diameter = _anchor_functionals(D, w)
    ok1 = a1 <= C * kap + 1e-30
    admissible = ok1[:, None] & ok1[None, :] & (a2 <= C * kap + 1e-30)
    np.fill_diagonal(admissible, False)
    cand = np.where(admissible, D, -1.0)
    if cand.max() > 0:
        flat = int(np.argmax(cand))
        i, j = divmod(flat, ids.size)
        return AnchorSelection(int(ids[i]), int(ids[j]), False, kap, a1, float(a2[i, j]))
    flat = int(np.argmax(D))
    i, j = divmod(flat, ids.size)
    return AnchorSelection(int(ids[i]), int(ids[j]), True, kap, a1, float(a2[i, j]))


def rank_anchor_pairs(space, subset=None, C: float = 16.0, m: int = 8):
    """Top-m admissible anchor pairs ranked by distance (global ids)."""
    ids = space.all_ids() if subset is None else check_subset(space, subset)
    if ids.size < 2:
        raise DomainError("need at least 2 points")
    D, w = space.submatrix(ids)
    kap, a1, a2, mu, diameter = _anchor_functionals(D, w)
    ok1 = a1 <= C * kap + 1e-30
    admissible = ok1[:, None] & ok1[None, :] & (a2 <= C * kap + 1e-30)
    iu = np.triu_indices(ids.size, k=1)
    dist = D[iu]
    adm = admissible[iu]
    order = np.lexsort((iu[1], iu[0], -dist, ~adm))  # admissible first, far first
    pairs = []
    for idx in order[:m]:
        i, j = iu[0][idx], iu[1][idx]
        if D[i, j] > 0:
            pairs.append((int(ids[i]), int(ids[j])))
    return pairs


# ---------------------------------------------------------------------------
# Circularity and the four-point machinery
# ---------------------------------------------------------------------------

_SPLITS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


@dataclass
class CircularityReport:
    ids: tuple
    eta_min: float  # smallest eta for which the quadruple is eta-circular

    def to_record(self):
        return {"ids": list(self.ids), "eta_min": self.eta_min}


def circularity(space, ids) -> CircularityReport:
    """eta_min = max over the 3 complementary pair splits of the distance gap."""
    ids = tuple(int(i) for i in ids)
    if len(ids) != 4 or len(set(ids)) != 4:
        raise DomainError("circularity needs 4 distinct point ids")
    eta = 0.0
    for (a, b), (c, d) in _SPLITS:
        eta = max(eta, abs(space.dist(ids[a], ids[b]) - space.dist(ids[c], ids[d])))
    return CircularityReport(ids, eta)


def four_point_embed(space, p, q, r, s, beta):
    """Four-point dichotomy: a 2*beta-isometric sign map or 2*beta-circularity.

    Preconditions: the 4-set excess is at most beta and d(P, Q) > 2*beta.
    Returns an EmbeddingWitness (isometry branch) or a CircularityReport
    (circular branch); the circular branch satisfying eta_min <= 2*beta is a
    hard postcondition.
    """
    quad = (int(p), int(q), int(r), int(s))
    if len(set(quad)) != 4:
        raise DomainError("four distinct points required")
    ex = set_excess(space, np.array(quad))
    if ex > beta * (1 + 1e-12) + 1e-15:
        raise PreconditionError(f"excess {ex:.3e} exceeds beta {beta:.3e}")
    dpq = space.dist(p, q)
    if not dpq > 2.0 * beta:
        raise PreconditionError(f"d(P,Q) = {dpq:.3e} not greater than 2*beta")
    ids = np.array(quad)
    D = space.D[np.ix_(ids, ids)]
    dP = D[0]
    sign = np.where(D[1] >= np.maximum(dpq, dP), -1.0, 1.0)
    values = sign * dP
    values[0] = 0.0
    values[1] = dpq
    err = np.abs(np.abs(values[:, None] - values[None, :]) - D)
    linf = float(err.max())
    if linf <= 2.0 * beta + BETWEEN_TOL:
        w = space.weights[ids]
        l1, _ = _distortions(D, w, values, float(D.max()))
        return EmbeddingWitness(ids, values, (int(p), int(q)), l1, linf)
    report = circularity(space, quad)
    if report.eta_min > 2.0 * beta + BETWEEN_TOL:
        raise InvariantViolation(
            f"four-point dichotomy failed: distortion {linf:.3e} and "
            f"eta_min {report.eta_min:.3e} both exceed 2*beta = {2 * beta:.3e}")
    return report


@dataclass
class AttractionResult:
    attracted: bool        # d(Q, P_i) <= 15 beta for some i
    excess_violated: bool  # excess of the 5-set exceeds beta


def attraction_check(space, p_ids, q_id, beta) -> AttractionResult:
    """Attraction-to-circular-points disjunction; at least one branch holds."""
    quad = tuple(int(i) for i in p_ids)
    if len(quad) != 4 or len(set(quad)) != 4:
        raise DomainError("need 4 distinct P ids")
    rep = circularity(space, quad)
    if rep.eta_min > 4.0 * beta * (1 + 1e-12) + 1e-15:
        raise PreconditionError(f"points are not 4*beta-circular (eta={rep.eta_min:.3e})")
    ex = set_excess(space, np.array(quad))
    if ex > beta * (1 + 1e-12) + 1e-15:
        raise PreconditionError(f"4-set excess {ex:.3e} exceeds beta")
    for a, b in itertools.combinations(quad, 2):
        if not space.dist(a, b) > 15.0 * beta:
            raise PreconditionError("pairwise distances must exceed 15*beta")
    dq = min(space.dist(q_id, pi) for pi in quad)
    attracted = dq <= 15.0 * beta + BETWEEN_TOL
    ex5 = set_excess(space, np.array(quad + (int(q_id),)))
    excess_violated = ex5 > beta - BETWEEN_TOL
    if not (attracted or excess_violated):
        raise InvariantViolation(
            f"attraction disjunction failed: d(Q, P) = {dq:.3e}, 5-set excess {ex5:.3e}")
    return AttractionResult(attracted, excess_violated)


def circular_criterion(space, ids, delta) -> bool:
    """Cyclic-betweenness criterion: under the hypotheses the quadruple must
    be 2*delta-circular; returns that check."""
    quad = tuple(int(i) for i in ids)
    if len(quad) != 4 or len(set(quad)) != 4:
        raise DomainError("need 4 distinct ids")
    ex = set_excess(space, np.array(quad))
    if ex > delta * (1 + 1e-12) + 1e-15:
        raise PreconditionError(f"4-set excess {ex:.3e} exceeds delta")
    x1, x2, x3, x4 = quad
    cyclic = ((x1, x2, x3), (x2, x3, x4), (x3, x4, x1), (x4, x1, x2))
    for (a, b, c) in cyclic:
        if not between(space, a, b, c):
            raise PreconditionError(f"betweenness [{a} {b} {c}] fails")
    return circularity(space, quad).eta_min <= 2.0 * delta + BETWEEN_TOL
