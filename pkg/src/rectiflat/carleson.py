"""Geometric-lemma (Carleson) sums over dyadic systems.

For a coefficient function h, exponent p, and neighborhood factor K, the
per-root normalized sum is  sum_{Q subset Q0} h(KQ)^p mu(Q) / mu(Q0), taken
over every descendant of Q0 down to the leaf level; the Carleson constant is
the max over all roots Q0.  Coefficients of singleton or zero-diameter
enlargements contribute zero.  h is evaluated once per cube into a memo and
aggregated bottom-up, so the whole table is shared across roots and the
result is deterministic.

Clamped coefficient values (into [0, 1]) are used by default, matching the
range the Carleson condition is stated for; ``clamped=False`` exposes raw
sums.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, DomainError


@dataclass
class CarlesonReport:
    coefficient: str
    p: float
    K: float
    j_min: int
    j_max: int
    constant: float
    per_root: list   # (cube id, level, normalized sum)
    per_level: list  # (level, mass-weighted mean of h(KQ)^p)
    clamped: bool

    def to_record(self) -> dict:
        return {
            "coefficient": self.coefficient,
            "p": self.p,
            "K": self.K,
            "j_min": self.j_min,
            "j_max": self.j_max,
            "constant": self.constant,
            "per_root": [list(r) for r in self.per_root],
            "per_level": [list(r) for r in self.per_level],
            "clamped": self.clamped,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True, indent=2)


def coefficient_table(system, coeff_fn, K, clamped=True) -> dict:
    """h(KQ) per cube id; singleton / zero-diameter enlargements give 0."""
    space = system.space
    table = {}
    for q in system.all_cubes():
        ids = system.enlarge(q, K)
        if ids.size < 2:
            table[q.id] = 0.0
            continue
        sub = space.D[np.ix_(ids, ids)]
        if float(sub.max()) <= 0.0:
            table[q.id] = 0.0
            continue
        try:
            value = coeff_fn(space, ids)
        except DegenerateError:
            table[q.id] = 0.0
            continue
        table[q.id] = value.clamped if clamped else value.raw
    return table


def glem_sum(system, coeff_fn, p, K, q0, clamped=True, memo=None) -> float:
    """Normalized geometric-lemma sum over all descendants of Q0."""
    if p <= 0:
        raise DomainError("exponent p must be positive")
    if K < 1:
        raise DomainError("neighborhood factor K must be >= 1")
    if memo is None:
        memo = coefficient_table(system, coeff_fn, K, clamped)
    raw = _raw_sums(system, memo, p)
    return raw[q0.id] / q0.mass


def _raw_sums(system, table, p):
    raw = {}
    for j in range(system.j_max, system.j_min - 1, -1):
        for q in system.level_cubes(j):
            acc = (table[q.id] ** p) * q.mass
            for c in q.children:
                acc += raw[c]
            raw[q.id] = acc
    return raw


def carleson_constant(system, coeff_fn, p, K, clamped=True) -> CarlesonReport:
    """Aggregate glem sums over every root; the constant is their max."""
    if p <= 0:
        raise DomainError("exponent p must be positive")
    if K < 1:
        raise DomainError("neighborhood factor K must be >= 1")
    table = coefficient_table(system, coeff_fn, K, clamped)
    raw = _raw_sums(system, table, p)
    per_root = []
    constant = 0.0
    for q in system.all_cubes():
        val = raw[q.id] / q.mass
        per_root.append((q.id, q.level, val))
        constant = max(constant, val)
    per_level = []
    for j in system.levels:
        cubes = system.level_cubes(j)
        mass = sum(q.mass for q in cubes)
        mean = sum((table[q.id] ** p) * q.mass for q in cubes) / mass
        per_level.append((j, mean))
    tag = getattr(coeff_fn, "tag", repr(coeff_fn))
    return CarlesonReport(tag, p, K, system.j_min, system.j_max,
                          constant, per_root, per_level, clamped)


def zigzag_growth_report(p_exponent, depths, n=96, glem_p=2.0, K=2.0) -> dict:
    """Exploratory: horizontal sup-beta geometric-lemma sums of lifted
    zig-zags per refinement depth.

    The zig-zag replacement angles decay like m^(-2/p_exponent); the report
    carries the per-depth root sums and their increments without asserting
    any divergence (the trends are resolution-limited on finite clouds).
    """
    import math

    from . import coeffs
    from . import heisenberg as heis
    from .core import GeneratorSpec, generate
    from .dyadic import build_dyadic

    def light_beta(space, ids):
        fit = heis.fit_hplane_report(space, ids, math.inf, 1, starts=2,
                                     nm_iters=120, baseline_budget=40)
        return coeffs.CoefficientValue(fit.value, witness=fit.plane)

    fn = coeffs.CoeffFn("beta[q=inf,heis-horizontal-1,light]", light_beta)
    sums = {}
    for depth in depths:
        sp = generate(GeneratorSpec("zigzag-lift", n=n, depth=depth, p=p_exponent))
        system = build_dyadic(sp)
        sums[depth] = glem_sum(system, fn, glem_p, K, system.root)
    ds = sorted(sums)
    return {
        "p_exponent": p_exponent,
        "glem_p": glem_p,
        "K": K,
        "n": n,
        "root_sums": {d: sums[d] for d in ds},
        "increments": {d2: sums[d2] - sums[d1] for d1, d2 in zip(ds, ds[1:])},
        "exploratory": True,
    }
