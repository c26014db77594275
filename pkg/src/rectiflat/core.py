"""Finite metric measure spaces, ambient backends, and dataset generators.

A :class:`FiniteMetricMeasureSpace` is a fixed, validated point cloud: a
distance oracle (dense matrix), strictly positive weights standing in for
H^s-mass, an ambient tag, and the regularity exponent s.  Subsets are plain
int arrays of point ids in a fixed order; all integrals are weighted sums in
ascending-id order, which keeps every downstream quantity bit-deterministic.

Generators produce the standard analysis suite: segments, circles, pairs of
parallel segments, the four-corner Cantor cloud, noisy segments, and
horizontally lifted zig-zag curves in the first Heisenberg group.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import AmbientError, DomainError, MetricError, SpecError, WeightError

TRIANGLE_TOL = 1e-9
COORD_MATRIX_RTOL = 1e-12
_EXHAUSTIVE_METRIC_N = 300


@dataclass(frozen=True)
class Ambient:
    """Ambient tag: "abstract", "euclidean" (dim = d), "heisenberg" (dim = n).

    Heisenberg points live in R^{2n+1} with the Koranyi metric.
    """

    kind: str
    dim: int = 0

    def __post_init__(self):
        if self.kind not in ("abstract", "euclidean", "heisenberg"):
            raise AmbientError(f"unknown ambient kind {self.kind!r}")
        if self.kind != "abstract" and self.dim < 1:
            raise AmbientError(f"{self.kind} ambient needs dim >= 1")

    @property
    def ncoords(self) -> int:
        if self.kind == "euclidean":
            return self.dim
        if self.kind == "heisenberg":
            return 2 * self.dim + 1
        return 0

    def __str__(self) -> str:
        return self.kind if self.kind == "abstract" else f"{self.kind}:{self.dim}"

    @staticmethod
    def parse(text: str) -> "Ambient":
        text = text.strip()
        if text == "abstract":
            return Ambient("abstract")
        if ":" in text:
            kind, _, d = text.partition(":")
            try:
                return Ambient(kind, int(d))
            except ValueError:
                pass
        raise AmbientError(f"cannot parse ambient {text!r}")


def heis_omega(x, y):
    """Symplectic form omega(x, y) = (1/2) sum_i (x_i y_{n+i} - x_{n+i} y_i)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = x.shape[-1] // 2
    return 0.5 * (x[..., :m] @ y[..., m:] - x[..., m:] @ y[..., :m])


def _euclidean_matrix(coords):
    diff = coords[:, None, :] - coords[None, :, :]
    D = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(D, 0.0)
    return D


def _heisenberg_matrix(coords):
    x = coords[:, :-1]
    t = coords[:, -1]
    m = x.shape[1] // 2
    A, B = x[:, :m], x[:, m:]
    omega = 0.5 * (A @ B.T - B @ A.T)  # omega[i, j] = omega(x_i, x_j)
    tau = t[None, :] - t[:, None] - omega
    diff = x[None, :, :] - x[:, None, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    D = (sq * sq + 16.0 * tau * tau) ** 0.25
    np.fill_diagonal(D, 0.0)
    return D


class FiniteMetricMeasureSpace:
    """Validated finite metric measure space; immutable after construction."""

    def __init__(self, D, weights, ambient, s, label="", coords=None,
                 default_weights=False, _validated=False):
        D = np.array(D, dtype=float)
        weights = np.array(weights, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise MetricError("distance matrix must be square")
        n = D.shape[0]
        if weights.shape != (n,):
            raise WeightError(f"expected {n} weights, got shape {weights.shape}")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise WeightError("weights must be strictly positive and finite")
        if not np.all(np.isfinite(D)):
            raise MetricError("distances must be finite")
        self.ambient = ambient
        self.s = float(s)
        self.label = label
        self.coords = None if coords is None else np.array(coords, dtype=float)
        self.default_weights = bool(default_weights)
        self._D = np.ascontiguousarray(D)
        self.weights = weights
        if not _validated:
            _validate_metric(self._D)
        self._D.flags.writeable = False
        self.weights.flags.writeable = False
        if self.coords is not None:
            self.coords.flags.writeable = False

    @property
    def n(self) -> int:
        return self._D.shape[0]

    @property
    def D(self):
        return self._D

    def dist(self, i: int, j: int) -> float:
        return float(self._D[i, j])

    def weight(self, i: int) -> float:
        return float(self.weights[i])

    def mass(self, ids=None) -> float:
        if ids is None:
            return float(self.weights.sum())
        return float(self.weights[np.asarray(ids, dtype=int)].sum())

    def diam(self, ids=None) -> float:
        return diam(self, np.arange(self.n) if ids is None else ids)

    def all_ids(self):
        return np.arange(self.n)

    def submatrix(self, ids):
        """(contiguous sub-distance-matrix, sub-weights) for a subset."""
        ids = check_subset(self, ids)
        return np.ascontiguousarray(self._D[np.ix_(ids, ids)]), self.weights[ids]

    def recompute_matrix(self):
        """Recompute distances from coordinates (coordinate ambients only)."""
        if self.coords is None:
            raise AmbientError("no coordinates to recompute from")
        if self.ambient.kind == "euclidean":
            return _euclidean_matrix(self.coords)
        return _heisenberg_matrix(self.coords)

    def matrix_consistent(self, rtol=COORD_MATRIX_RTOL) -> bool:
        R = self.recompute_matrix()
        scale = max(float(self._D.max()), 1e-300)
        return bool(np.max(np.abs(R - self._D)) <= rtol * scale)

    def to_record(self) -> dict:
        rec = {
            "schema_version": 1,
            "ambient": str(self.ambient),
            "s": self.s,
            "label": self.label,
            "weights": self.weights.tolist(),
        }
        if self.coords is not None:
            rec["coords"] = self.coords.tolist()
        else:
            rec["matrix"] = self._D.tolist()
        return rec

    @staticmethod
    def from_record(rec: dict) -> "FiniteMetricMeasureSpace":
        ambient = Ambient.parse(rec["ambient"])
        weights = rec.get("weights")
        if "coords" in rec:
            return build_space(np.array(rec["coords"], dtype=float), ambient,
                              weights=weights, s=rec["s"], label=rec.get("label", ""))
        return build_space(np.array(rec["matrix"], dtype=float), ambient,
                           weights=weights, s=rec["s"], label=rec.get("label", ""))

    def __repr__(self):
        return (f"FiniteMetricMeasureSpace(n={self.n}, ambient={self.ambient}, "
                f"s={self.s}, label={self.label!r})")


def _validate_metric(D):
    n = D.shape[0]
    scale = max(float(D.max()), 1.0) if n else 1.0
    if float(np.max(np.abs(np.diag(D)))) > 0.0:
        raise MetricError("nonzero diagonal")
    if float(np.max(np.abs(D - D.T))) > TRIANGLE_TOL * scale:
        raise MetricError("asymmetric distance matrix")
    if float(D.min()) < 0:
        raise MetricError("negative distance")
    if n <= _EXHAUSTIVE_METRIC_N:
        worst = kernels.triangle_violation(D)
    else:
        rng = np.random.default_rng(0)
        idx = rng.integers(0, n, size=(200_000, 3))
        worst = float(np.max(D[idx[:, 0], idx[:, 2]]
                             - D[idx[:, 0], idx[:, 1]] - D[idx[:, 1], idx[:, 2]]))
    if worst > TRIANGLE_TOL:
        raise MetricError(f"triangle inequality violated by {worst:.3e}")


def check_subset(space, ids):
    """Validate a point-id subset: in range, no duplicates; returns int array."""
    ids = np.asarray(ids, dtype=int)
    if ids.ndim != 1:
        raise DomainError("subset must be a 1-d id sequence")
    if ids.size and (ids.min() < 0 or ids.max() >= space.n):
        raise DomainError("point id out of range")
    if np.unique(ids).size != ids.size:
        raise DomainError("duplicate point ids in subset")
    return ids


def build_space(data, ambient, weights=None, s=1.0, label="") -> FiniteMetricMeasureSpace:
    """Build a space from coordinates (euclidean/heisenberg) or a distance matrix.

    Missing weights default to the uniform H^s surrogate ``diam(E)^s / n``
    (``1/n`` for a zero-diameter cloud); this choice is recorded on the space
    and surfaced as a caveat in analysis reports, since it affects every
    mu-integral downstream.
    """
    if isinstance(ambient, str):
        ambient = Ambient.parse(ambient)
    data = np.array(data, dtype=float)
    if ambient.kind == "abstract":
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise MetricError("abstract ambient expects a square distance matrix")
        D, coords = data, None
    else:
        if data.ndim == 1:
            data = data[:, None]
        if data.shape[1] != ambient.ncoords:
            raise AmbientError(
                f"expected {ambient.ncoords} coordinates for {ambient}, got {data.shape[1]}")
        coords = data
        D = _euclidean_matrix(coords) if ambient.kind == "euclidean" else _heisenberg_matrix(coords)
    n = D.shape[0]
    if n == 0:
        raise DomainError("empty space")
    default_weights = weights is None
    if default_weights:
        dm = float(D.max())
        weights = np.full(n, (dm ** s) / n if dm > 0 else 1.0 / n)
    return FiniteMetricMeasureSpace(D, weights, ambient, s, label=label, coords=coords,
                                    default_weights=default_weights,
                                    _validated=(coords is not None))


def diam(space, subset) -> float:
    """Exact max pairwise distance over the subset; 0 for singletons."""
    ids = check_subset(space, subset)
    if ids.size == 0:
        raise DomainError("diam of empty subset")
    if ids.size == 1:
        return 0.0
    return float(space.D[np.ix_(ids, ids)].max())


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

_KINDS = ("line", "circle", "parallel-lines", "cantor4", "perturbed-line", "zigzag-lift")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int = 0
    seed: int = 0
    eps: float = 0.25     # parallel-lines: separation eps * r
    r: float = 1.0        # parallel-lines: segment length
    depth: int = 2        # cantor4 / zigzag-lift recursion depth
    noise: float = 0.01   # perturbed-line vertical amplitude
    p: float = 3.0        # zigzag-lift angle-decay exponent

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise SpecError(f"unknown generator kind {self.kind!r}")
        if self.kind in ("line", "circle", "parallel-lines", "perturbed-line",
                         "zigzag-lift") and self.n < 1:
            raise SpecError("n must be >= 1")
        if self.kind == "parallel-lines":
            if not (0.0 < self.eps <= 0.5):
                raise SpecError("parallel-lines eps must lie in (0, 1/2]")
            if self.r <= 0:
                raise SpecError("parallel-lines r must be positive")
            if self.n < 2:
                raise SpecError("parallel-lines needs n >= 2")
        if self.kind in ("cantor4", "zigzag-lift") and not (1 <= self.depth <= 8):
            raise SpecError("depth must lie in [1, 8]")
        if self.kind == "perturbed-line" and self.noise < 0:
            raise SpecError("noise must be nonnegative")
        if self.kind == "zigzag-lift" and self.p <= 0:
            raise SpecError("zigzag-lift p must be positive")

    def describe(self) -> str:
        extra = {
            "parallel-lines": f",eps={self.eps},r={self.r}",
            "cantor4": f",depth={self.depth}",
            "perturbed-line": f",noise={self.noise}",
            "zigzag-lift": f",p={self.p},depth={self.depth}",
        }.get(self.kind, "")
        return f"{self.kind},n={self.n},seed={self.seed}{extra}"


def parse_generator(text: str) -> GeneratorSpec:
    """Parse "kind,n=64,seed=0,eps=0.125,..." into a GeneratorSpec."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise SpecError("empty generator spec")
    kind = parts[0]
    kw = {}
    casts = {"n": int, "seed": int, "depth": int,
             "eps": float, "r": float, "noise": float, "p": float}
    for part in parts[1:]:
        if "=" not in part:
            raise SpecError(f"bad generator field {part!r}")
        key, _, val = part.partition("=")
        key = key.strip()
        if key not in casts:
            raise SpecError(f"unknown generator field {key!r}")
        try:
            kw[key] = casts[key](val)
        except ValueError as exc:
            raise SpecError(f"bad value for {key!r}: {val!r}") from exc
    return GeneratorSpec(kind, **kw)


def _line_coords(n):
    if n == 1:
        return np.zeros((1, 2))
    x = np.arange(n) / (n - 1)
    return np.column_stack([x, np.zeros(n)])


def _zigzag_polyline(p, depth):
    """Planar zig-zag: each refinement replaces segments by two equal legs at
    angle theta_m = (pi/5) * m^(-2/p) to the parent segment, alternating side."""
    pts = np.array([[0.0, 0.0], [1.0, 0.0]])
    for m in range(1, depth + 1):
        theta = (math.pi / 5.0) * m ** (-2.0 / p)
        out = [pts[0]]
        for i in range(len(pts) - 1):
            a, b = pts[i], pts[i + 1]
            mid = 0.5 * (a + b)
            d = b - a
            perp = np.array([-d[1], d[0]])
            sign = 1.0 if i % 2 == 0 else -1.0
            out.append(mid + sign * 0.5 * math.tan(theta) * perp)
            out.append(b)
        pts = np.array(out)
    return pts


def _sample_polyline(pts, n):
    seg = np.sqrt(((np.diff(pts, axis=0)) ** 2).sum(axis=1))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    targets = np.arange(n) / max(n - 1, 1) * total
    out = np.empty((n, 2))
    j = 0
    for i, t in enumerate(targets):
        while j < len(seg) - 1 and cum[j + 1] < t:
            j += 1
        frac = 0.0 if seg[j] == 0 else (t - cum[j]) / seg[j]
        out[i] = pts[j] + frac * (pts[j + 1] - pts[j])
    return out, total


def horizontal_lift(polyline, t0: float = 0.0):
    """Lift a planar polyline to H^1; t accumulates omega(x, dx) per segment.

    Exact for polylines: along a straight segment the lift increment is
    omega(a, b - a).  Returns an (m, 3) array of Heisenberg points whose
    planar projection equals the input.
    """
    pts = np.asarray(polyline, dtype=float)
    m = pts.shape[0]
    out = np.empty((m, 3))
    out[:, :2] = pts
    t = float(t0)
    out[0, 2] = t
    for i in range(m - 1):
        t += float(heis_omega(pts[i], pts[i + 1] - pts[i]))
        out[i + 1, 2] = t
    return out


def generate(spec: GeneratorSpec) -> FiniteMetricMeasureSpace:
    """Deterministic dataset generator; a pure function of its arguments."""
    kind, n = spec.kind, spec.n
    if kind == "line":
        coords = _line_coords(n)
        w = np.full(n, 1.0 / n)
        return FiniteMetricMeasureSpace(_euclidean_matrix(coords), w,
                                        Ambient("euclidean", 2), 1.0,
                                        label=spec.describe(), coords=coords,
                                        _validated=True)
    if kind == "circle":
        ang = 2.0 * math.pi * np.arange(n) / n
        coords = np.column_stack([np.cos(ang), np.sin(ang)])
        w = np.full(n, 2.0 * math.pi / n)
        return FiniteMetricMeasureSpace(_euclidean_matrix(coords), w,
                                        Ambient("euclidean", 2), 1.0,
                                        label=spec.describe(), coords=coords,
                                        _validated=True)
    if kind == "parallel-lines":
        n1 = n // 2
        n2 = n - n1
        xs1 = spec.r * (np.arange(n1) / max(n1 - 1, 1))
        xs2 = spec.r * (np.arange(n2) / max(n2 - 1, 1))
        coords = np.concatenate([
            np.column_stack([xs1, np.zeros(n1)]),
            np.column_stack([xs2, np.full(n2, spec.eps * spec.r)]),
        ])
        w = np.concatenate([np.full(n1, spec.r / n1), np.full(n2, spec.r / n2)])
        return FiniteMetricMeasureSpace(_euclidean_matrix(coords), w,
                                        Ambient("euclidean", 2), 1.0,
                                        label=spec.describe(), coords=coords,
                                        _validated=True)
    if kind == "cantor4":
        pts = np.zeros((1, 2))
        for m in range(1, spec.depth + 1):
            step = 0.75 * 4.0 ** (-(m - 1))
            offsets = np.array([[0.0, 0.0], [step, 0.0], [0.0, step], [step, step]])
            pts = (pts[:, None, :] + offsets[None, :, :]).reshape(-1, 2)
        count = pts.shape[0]
        w = np.full(count, 4.0 ** (-spec.depth))
        return FiniteMetricMeasureSpace(_euclidean_matrix(pts), w,
                                        Ambient("euclidean", 2), 1.0,
                                        label=spec.describe(), coords=pts,
                                        _validated=True)
    if kind == "perturbed-line":
        rng = np.random.default_rng(spec.seed)
        coords = _line_coords(n)
        coords[:, 1] = spec.noise * rng.uniform(-1.0, 1.0, n)
        w = np.full(n, 1.0 / n)
        return FiniteMetricMeasureSpace(_euclidean_matrix(coords), w,
                                        Ambient("euclidean", 2), 1.0,
                                        label=spec.describe(), coords=coords,
                                        _validated=True)
    if kind == "zigzag-lift":
        poly = _zigzag_polyline(spec.p, spec.depth)
        samples, total = _sample_polyline(poly, n)
        coords = horizontal_lift(samples, 0.0)
        w = np.full(n, total / n)
        return FiniteMetricMeasureSpace(_heisenberg_matrix(coords), w,
                                        Ambient("heisenberg", 1), 1.0,
                                        label=spec.describe(), coords=coords,
                                        _validated=True)
    raise SpecError(f"unknown generator kind {kind!r}")


# ---------------------------------------------------------------------------
# CSV / JSON ingestion
# ---------------------------------------------------------------------------

def save_csv(space, path):
    """One point per row: x1..xd[,weight].  Coordinate ambients only."""
    if space.coords is None:
        raise AmbientError("abstract spaces have no coordinate CSV form")
    d = space.coords.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(d)] + ["weight"])
        for row, w in zip(space.coords, space.weights):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(w))])


def load_csv(path, ambient, s=1.0, label="") -> FiniteMetricMeasureSpace:
    if isinstance(ambient, str):
        ambient = Ambient.parse(ambient)
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                continue  # header
    if not rows:
        raise DomainError(f"no data rows in {path}")
    arr = np.array(rows, dtype=float)
    d = ambient.ncoords
    if arr.shape[1] == d + 1:
        return build_space(arr[:, :d], ambient, weights=arr[:, d], s=s, label=label)
    if arr.shape[1] == d:
        return build_space(arr, ambient, s=s, label=label)
    raise AmbientError(
        f"{path}: expected {d} or {d + 1} columns for {ambient}, got {arr.shape[1]}")


def save_json(space, path):
    with open(path, "w") as fh:
        json.dump(space.to_record(), fh, sort_keys=True, indent=2)


def load_json(path) -> FiniteMetricMeasureSpace:
    with open(path) as fh:
        return FiniteMetricMeasureSpace.from_record(json.load(fh))
