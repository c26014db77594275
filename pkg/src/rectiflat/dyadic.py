"""Christ-David dyadic cube systems on finite spaces.

Construction is a top-down greedy net hierarchy.  The root level j_min
(chosen so that 2^-j_min <= diam(E) < 2^-j_min+1) holds a single cube with
all points; below it, level-j centers form a maximal 2^-j-separated subset
of the points (ascending-id greedy) that always contains the previous
level's centers.  Points of a parent cube are split among the candidate
centers lying inside that parent (nearest center, ties to the smaller
center id), so partition / nesting / unique-ancestor hold exactly by
construction.  The inner/outer ball constant c0 is measured a posteriori
and recorded, never asserted a priori.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass
class Cube:
    id: int
    level: int
    members: np.ndarray  # sorted point ids
    center: int
    ell: float
    mass: float
    diam: float
    parent: int = -1
    children: list = field(default_factory=list)

    @property
    def is_singleton(self) -> bool:
        return self.members.size == 1


class DyadicSystem:
    def __init__(self, space, cubes, level_assign, j_min, j_max, c0):
        self.space = space
        self.cubes = cubes
        self.level_assign = level_assign  # level j -> (n,) array of cube ids
        self.j_min = j_min
        self.j_max = j_max
        self.c0 = c0

    @property
    def levels(self):
        return range(self.j_min, self.j_max + 1)

    def level_cubes(self, j):
        ids = sorted(set(self.level_assign[j].tolist()))
        return [self.cubes[i] for i in ids]

    def cube_of(self, point: int, j: int) -> Cube:
        return self.cubes[int(self.level_assign[j][point])]

    @property
    def root(self) -> Cube:
        return self.cubes[0]

    def all_cubes(self):
        return self.cubes

    def enlarge(self, cube: Cube, K: float):
        """KQ = {x in E : dist(x, Q) <= (K - 1) diam(Q)}; enlarge(Q, 1) = Q."""
        if K < 1.0:
            raise DomainError("enlargement factor K must be >= 1")
        if K == 1.0 or cube.diam == 0.0:
            return cube.members.copy()
        dist_to_q = self.space.D[:, cube.members].min(axis=1)
        return np.flatnonzero(dist_to_q <= (K - 1.0) * cube.diam)

    def descendants(self, cube: Cube, j: int):
        """F_j(Q): the j-th descendants of Q (j generations down)."""
        if j < 0 or cube.level + j > self.j_max:
            raise DomainError(
                f"descendant level {cube.level + j} outside [{self.j_min}, {self.j_max}]")
        current = [cube]
        for _ in range(j):
            current = [self.cubes[c] for q in current for c in q.children]
        return current

    def descendant_count_constant(self) -> float:
        """Smallest c with card(F_j(Q)) <= c 2^{s j} over all cubes and depths."""
        s = self.space.s
        best = 0.0
        for q in self.cubes:
            current = [q]
            j = 0
            while True:
                best = max(best, len(current) / 2.0 ** (s * j))
                nxt = [self.cubes[c] for qq in current for c in qq.children]
                if not nxt:
                    break
                current = nxt
                j += 1
        return best

    def to_json(self) -> str:
        obj = {
            "schema_version": 1,
            "j_min": self.j_min,
            "j_max": self.j_max,
            "c0": self.c0,
            "cubes": [
                {
                    "id": q.id,
                    "level": q.level,
                    "center": q.center,
                    "parent": q.parent,
                    "ell": q.ell,
                    "mass": q.mass,
                    "diam": q.diam,
                    "members": q.members.tolist(),
                }
                for q in self.cubes
            ],
        }
        return json.dumps(obj, sort_keys=True, indent=2)


def _j_min_for(diameter: float) -> int:
    # 2^-j <= diam < 2^-j+1
    j = math.ceil(-math.log2(diameter))
    while 2.0 ** (-j) > diameter:
        j += 1
    while 2.0 ** (-(j - 1)) <= diameter:
        j -= 1
    return j


def build_dyadic(space) -> DyadicSystem:
    """Build the greedy-net dyadic system for a space."""
    n = space.n
    D = space.D
    w = space.weights
    if n == 0:
        raise DomainError("empty space")
    dm = float(D.max())
    if dm == 0.0:
        cube = Cube(0, 0, np.arange(n), 0, 1.0, float(w.sum()), 0.0)
        assign = {0: np.zeros(n, dtype=int)}
        return DyadicSystem(space, [cube], assign, 0, 0, 1.0)

    j_min = _j_min_for(dm)
    off = D.copy()
    np.fill_diagonal(off, np.inf)
    positive = off[off > 0]
    minpos = float(positive.min()) if positive.size else np.inf

    cubes = [Cube(0, j_min, np.arange(n), 0, 2.0 ** (-j_min), float(w.sum()), dm)]
    level_assign = {j_min: np.zeros(n, dtype=int)}
    centers = [0]
    j = j_min
    while True:
        level = [cubes[c] for c in sorted(set(level_assign[j].tolist()))]
        if all(q.is_singleton for q in level):
            break
        if 2.0 ** (-j) < minpos / 4.0:
            break
        j += 1
        sep = 2.0 ** (-j)
        new_centers = list(centers)
        for p in range(n):
            if np.all(D[p, new_centers] >= sep):
                new_centers.append(p)
        centers = new_centers
        centers_arr = np.array(centers)
        assign = np.empty(n, dtype=int)
        for parent in level:
            cand = centers_arr[np.isin(centers_arr, parent.members)]
            # nearest candidate center; ties to the smaller center id
            cand = np.sort(cand)
            dists = D[np.ix_(parent.members, cand)]
            nearest = cand[np.argmin(dists, axis=1)]
            for c in np.unique(nearest):
                members = parent.members[nearest == c]
                cube = Cube(len(cubes), j, members, int(c), 2.0 ** (-j),
                            float(w[members].sum()),
                            float(D[np.ix_(members, members)].max()) if members.size > 1 else 0.0,
                            parent=parent.id)
                parent.children.append(cube.id)
                cubes.append(cube)
                assign[members] = cube.id
        level_assign[j] = assign
    j_max = j

    c0 = 1.0
    for q in cubes:
        if q.diam > 0:
            c0 = min(c0, q.ell / q.diam)
        if q.members.size < n:
            outside = np.setdiff1d(np.arange(n), q.members, assume_unique=True)
            c0 = min(c0, float(D[q.center, outside].min()) / q.ell)
    return DyadicSystem(space, cubes, level_assign, j_min, j_max, c0)


def verify_dyadic(system) -> dict:
    """Exact checks of the five structural cube properties; returns a report."""
    space = system.space
    n = space.n
    D = space.D
    report = {}
    ok_partition = True
    for j in system.levels:
        seen = np.zeros(n, dtype=int)
        for q in system.level_cubes(j):
            seen[q.members] += 1
        if not np.all(seen == 1):
            ok_partition = False
    report["partition"] = ok_partition

    ok_nesting = all(
        q.parent == -1 or np.all(np.isin(q.members, system.cubes[q.parent].members))
        for q in system.cubes)
    report["nesting"] = ok_nesting

    ok_ancestor = True
    for q in system.cubes:
        hop = q
        for j in range(q.level - 1, system.j_min - 1, -1):
            hop = system.cubes[hop.parent] if hop.parent != -1 else None
            if hop is None or hop.level != j or not np.all(np.isin(q.members, hop.members)):
                ok_ancestor = False
                break
    report["unique_ancestor"] = ok_ancestor

    c0 = system.c0
    report["diam_bound"] = all(
        q.diam <= (q.ell / c0) * (1.0 + 1e-12) for q in system.cubes)
    ok_ball = True
    for q in system.cubes:
        if q.members.size == n:
            continue
        outside = np.setdiff1d(np.arange(n), q.members, assume_unique=True)
        if float(D[q.center, outside].min()) < c0 * q.ell * (1.0 - 1e-12):
            ok_ball = False
    report["inner_ball"] = ok_ball
    report["c0"] = c0
    report["ok"] = all(report[k] for k in
                       ("partition", "nesting", "unique_ancestor", "diam_bound", "inner_ball"))
    return report


def ball_cover_constant(system, n_samples=200, seed=0) -> float:
    """Achieved K for covering balls by enlarged cubes.

    For sampled (z, R) with R < diam(E), take j with 2^-j <= R < 2^-j+1
    (clamped to the level range) and Q = cube at level j containing z; the
    achieved K is the smallest value with E cap B(z, R) inside KQ.
    """
    space = system.space
    D = space.D
    dm = float(D.max())
    rng = np.random.default_rng(seed)
    worst = 1.0
    for _ in range(n_samples):
        z = int(rng.integers(0, space.n))
        R = float(rng.uniform(0.0, 1.0)) * dm
        if R <= 0:
            continue
        j = min(max(_j_min_for(R) if R < dm else system.j_min, system.j_min), system.j_max)
        q = system.cube_of(z, j)
        ball = np.flatnonzero(D[z] < R)
        if ball.size == 0 or q.diam == 0.0:
            continue
        reach = float(D[np.ix_(ball, q.members)].min(axis=1).max())
        worst = max(worst, 1.0 + reach / q.diam)
    return worst
