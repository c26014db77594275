"""Batch front door: ingestion, experiment orchestration, report emission.

Subcommands: analyze (full coefficient / Carleson report), embed (anchor
selection plus line-embedding certificates), verify (named invariant
suites), generate (write a dataset as CSV).  Reports are JSON with sorted
keys, so identical configs produce byte-identical bytes regardless of the
RECTIFLAT_THREADS setting (all computations are deterministic and the env
var only caps parallelism, which this implementation does not exploit).

Exit codes: 0 success, 2 configuration/usage, 3 I/O, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import carleson, coeffs, suite
from .core import (Ambient, generate, load_csv, load_json,
                   parse_generator, save_csv)
from .dyadic import build_dyadic
from .errors import ConfigError, RectiflatError, SpecError
from .menger import menger_map, select_anchors

DEFAULT_WEIGHT_CAVEAT = (
    "weights were defaulted to the uniform surrogate diam(E)^s / n; how "
    "faithfully this emulates H^s mass on user data is unquantified and "
    "affects every mu-integral in this report")


@dataclass
class AnalysisConfig:
    input: str = ""            # CSV/JSON path, or "" when generating
    generator: str = ""        # generator spec text, or "" when reading a file
    ambient: str = "euclidean:2"
    s: float = 1.0
    coefficients: list = field(default_factory=lambda: ["beta:q=2"])
    p_grid: list = field(default_factory=lambda: [2.0])
    K_grid: list = field(default_factory=lambda: [2.0])
    exact_cap: int = 256
    mc_samples: int = 100_000
    seed: int = 0
    iota_bracket: bool = True
    out: str = ""

    def validate(self):
        if not self.input and not self.generator:
            raise ConfigError("config.input or config.generator required")
        if self.input and self.generator:
            raise ConfigError("config.input and config.generator are exclusive")
        if not self.coefficients:
            raise ConfigError("config.coefficients must be nonempty")
        if not self.p_grid or not self.K_grid:
            raise ConfigError("config.p_grid and config.K_grid must be nonempty")
        if any(p <= 0 for p in self.p_grid):
            raise ConfigError("config.p_grid entries must be positive")
        if any(k < 1 for k in self.K_grid):
            raise ConfigError("config.K_grid entries must be >= 1")
        return self

    def to_record(self):
        return asdict(self)

    @staticmethod
    def from_record(rec) -> "AnalysisConfig":
        return AnalysisConfig(**rec).validate()


def _parse_coeff(text: str, ambient: Ambient):
    """"beta:q=2" / "kappa" / "iota:q=1" -> CoeffFn for this ambient."""
    name, _, rest = text.partition(":")
    opts = {}
    for part in rest.split(","):
        if not part:
            continue
        key, _, val = part.partition("=")
        opts[key.strip()] = val.strip()
    q = math.inf if opts.get("q") in ("inf", "oo") else float(opts.get("q", 2))
    k = int(opts.get("k", 1))
    if ambient.kind == "euclidean":
        family = f"euclidean-{k}"
    elif ambient.kind == "heisenberg":
        family = f"heis-horizontal-{k}"
    else:
        family = None
    if name == "beta":
        if family is None:
            raise ConfigError("beta on an abstract ambient needs a plane family")
        return coeffs.beta_fn(q, family)
    if name == "kappa":
        return coeffs.kappa_fn()
    if name == "iota":
        if family is None:
            raise ConfigError("iota on an abstract ambient is not plane-based")
        return coeffs.iota_fn(q, family)
    raise ConfigError(f"unknown coefficient {text!r}")


def load_space(config: AnalysisConfig):
    if config.generator:
        return generate(parse_generator(config.generator))
    path = config.input
    if path.endswith(".json"):
        return load_json(path)
    return load_csv(path, config.ambient, s=config.s)


def analyze(config: AnalysisConfig) -> dict:
    config.validate()
    space = load_space(config)
    system = build_dyadic(space)
    ambient = space.ambient
    report = {
        "schema_version": 1,
        "config": config.to_record(),
        "space": {
            "n": space.n,
            "ambient": str(ambient),
            "s": space.s,
            "label": space.label,
            "diam": space.diam(),
            "mass": space.mass(),
        },
        "dyadic": {
            "j_min": system.j_min,
            "j_max": system.j_max,
            "c0": system.c0,
            "n_cubes": len(system.all_cubes()),
        },
        "caveats": [DEFAULT_WEIGHT_CAVEAT] if space.default_weights else [],
    }
    coeff_fns = [_parse_coeff(c, ambient) for c in config.coefficients]

    tables = []
    for fn in coeff_fns:
        for K in config.K_grid:
            table = carleson.coefficient_table(system, fn, K, clamped=True)
            tables.append({
                "coefficient": fn.tag,
                "K": K,
                "per_cube": [
                    {"cube": q.id, "level": q.level, "value": table[q.id]}
                    for q in system.all_cubes()
                ],
            })
    report["coefficients"] = tables

    reports = []
    for fn in coeff_fns:
        for p in config.p_grid:
            for K in config.K_grid:
                rep = carleson.carleson_constant(system, fn, p, K)
                reports.append(rep.to_record())
    report["carleson"] = reports

    if config.iota_bracket:
        root = system.root
        ids = system.enlarge(root, 2.0)
        if ids.size >= 2 and space.D[np.ix_(ids, ids)].max() > 0:
            br = coeffs.iota_estimate(space, ids, q=1, k=1, seed=config.seed,
                                      exact_cap=config.exact_cap)
            report["iota_bracket"] = {
                "cube": root.id,
                "lower": br.lower,
                "upper": br.upper,
                "witness": br.upper_witness.to_record() if br.upper_witness else None,
            }

    checked, violations = 0, 0
    if ambient.kind != "abstract":
        family = ("euclidean-1" if ambient.kind == "euclidean" else "heis-horizontal-1")
        for q in system.all_cubes():
            ids = system.enlarge(q, 2.0)
            if ids.size < 3 or space.D[np.ix_(ids, ids)].max() == 0:
                continue
            b = coeffs.beta(space, ids, 1, family)
            it = coeffs.iota_plane(space, ids, 1, b.witness)
            checked += 1
            if it.raw > 2.0 * b.raw + 1e-9:
                violations += 1
    report["inequalities"] = {
        "iota_le_2beta": {"checked": checked, "violations": violations},
    }
    return report


def embed_report(config: AnalysisConfig) -> dict:
    config.validate()
    space = load_space(config)
    sel = select_anchors(space)
    wit = menger_map(space, sel.p, sel.q)
    return {
        "schema_version": 1,
        "config": config.to_record(),
        "space": {"n": space.n, "ambient": str(space.ambient), "label": space.label},
        "anchors": {"p": sel.p, "q": sel.q, "fallback": sel.fallback,
                    "kappa": sel.kappa},
        "witness": wit.to_record(),
    }


def _dump(report: dict, out: str) -> bytes:
    blob = (json.dumps(report, sort_keys=True, indent=2) + "\n").encode()
    if out:
        with open(out, "wb") as fh:
            fh.write(blob)
    else:
        sys.stdout.write(blob.decode())
    return blob


def _write_cube_csv(report: dict, out: str):
    base, _, _ = out.rpartition(".")
    path = (base or out) + "_cubes.csv"
    with open(path, "w") as fh:
        fh.write("coefficient,K,cube,level,value\n")
        for tab in report.get("coefficients", []):
            for row in tab["per_cube"]:
                fh.write(f"{tab['coefficient']},{tab['K']},{row['cube']},"
                         f"{row['level']},{row['value']!r}\n")


def _build_config(args) -> AnalysisConfig:
    cfg = AnalysisConfig(
        input=args.input or "",
        generator=args.generate or "",
        ambient=args.ambient,
        s=args.s,
        coefficients=args.coeff or ["beta:q=2"],
        p_grid=args.p or [2.0],
        K_grid=args.K or [2.0],
        exact_cap=args.exact_cap,
        mc_samples=args.mc_samples,
        seed=args.seed,
        out=args.out or "",
    )
    return cfg.validate()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rectiflat",
        description="flatness coefficients and Carleson sums on point clouds")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p):
        p.add_argument("--input", help="CSV or JSON dataset path")
        p.add_argument("--generate", help="generator spec, e.g. 'line,n=64'")
        p.add_argument("--ambient", default="euclidean:2",
                       help="abstract | euclidean:d | heisenberg:n")
        p.add_argument("--s", type=float, default=1.0)
        p.add_argument("--coeff", action="append",
                       help="beta[:q=..,k=..] | kappa | iota[:q=..,k=..] (repeatable)")
        p.add_argument("--p", action="append", type=float)
        p.add_argument("--K", action="append", type=float)
        p.add_argument("--exact-cap", type=int, default=256, dest="exact_cap")
        p.add_argument("--mc-samples", type=int, default=100_000, dest="mc_samples")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")

    pa = sub.add_parser("analyze", help="coefficient tables and Carleson reports")
    add_io(pa)
    pe = sub.add_parser("embed", help="anchor selection and line embedding")
    add_io(pe)
    pv = sub.add_parser("verify", help="run a named invariant suite")
    pv.add_argument("suite", choices=suite.SUITE_NAMES)
    pg = sub.add_parser("generate", help="write a generated dataset as CSV")
    pg.add_argument("spec", help="generator spec, e.g. 'cantor4,depth=2'")
    pg.add_argument("out", help="CSV output path")

    args = parser.parse_args(argv)
    os.environ.setdefault("RECTIFLAT_THREADS", "1")

    try:
        if args.command == "analyze":
            report = analyze(_build_config(args))
            _dump(report, args.out or "")
            if args.out:
                _write_cube_csv(report, args.out)
            return 0
        if args.command == "embed":
            report = embed_report(_build_config(args))
            _dump(report, args.out or "")
            return 0
        if args.command == "verify":
            checks = suite.run_suite(args.suite)
            failed = [c for c in checks if not c[1]]
            for name, ok, detail in checks:
                print(f"[{'PASS' if ok else 'FAIL'}] {args.suite}/{name}: {detail}")
            return 4 if failed else 0
        if args.command == "generate":
            spec = parse_generator(args.spec)
            save_csv(generate(spec), args.out)
            return 0
    except (ConfigError, SpecError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    except RectiflatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
