"""The full deterministic verification suite.

Runs every numerical check with fixed sample counts and a single master
seed and returns one JSON-serializable dict.  Nothing time- or
machine-dependent goes into the result, so two runs with the same seed
serialize to identical bytes.
"""

from __future__ import annotations

import json

from . import __version__
from . import bounds, maps, planners
from .geometry import TOL, SpaceDescriptor

DEFAULTS = {
    "relation_samples": 10_000,
    "retraction_samples": 1000,
    "section_pairs": 1000,
    "hopf_samples": 10_000,
    "witness_samples": 1000,
    "N": planners.DEFAULT_N,
}


def relation_block(seed: int, tol: float, samples: int) -> list[dict]:
    out = []
    specs = [maps.builtin_bilinear(k) for k in ("complex", "quaternion", "octonion")]
    specs += [maps.builtin_bilinear("poly", r=r) for r in range(1, 7)]
    for spec in specs:
        for rel in ("SYM", "AXIAL2"):
            out.append(maps.check_relations(spec, rel, samples, seed, tol).to_json())
    for n, m in ((1, 3), (2, 4), (1, 6)):
        spec = maps.builtin_bilinear("lens", n=n, m=m)
        out.append(maps.check_relations(spec, "TCE", samples, seed, tol).to_json())
    return out


def section_block(seed: int, tol: float, pairs: int, N: int) -> list[dict]:
    out = []
    specs = [maps.builtin_bilinear("complex")] + [maps.builtin_bilinear("poly", r=r) for r in range(2, 7)]
    for spec in specs:
        planner = planners.rotation_planner(spec, N=N, seed=seed, tol=tol)
        out.append(planners.verify_section(planner, pairs, seed, tol).to_json())
    for m in (2, 4, 6, 8):
        for n in range(4):
            planner = planners.lift_planner(SpaceDescriptor.lens(n, m), N=N)
            out.append(planners.verify_section(planner, pairs, seed, tol).to_json())
    return out


def bounds_block(seed: int, tol: float, samples: int) -> dict:
    spaces = [SpaceDescriptor.parse(s) for s in
              ("rp:1", "rp:7", "rp:16", "lens:5,8", "lens:3,4", "lens:2,3", "cp:3", "sphere:1", "sphere:2")]
    witnesses = []
    for r in range(1, 7):
        rep = bounds.witness_upper(maps.builtin_bilinear("poly", r=r), samples, seed, tol)
        witnesses.append(rep.to_json())
    return {
        "reports": [bounds.bounds_for(s).to_json() for s in spaces],
        "witnesses": witnesses,
        "table1": bounds.table1(),
        "table2": bounds.table2(),
    }


def run_suite(seed: int = 0, tol: float = TOL, **overrides) -> dict:
    cfg = {**DEFAULTS, **overrides}
    unknown = set(cfg) - set(DEFAULTS)
    if unknown:
        raise TypeError(f"unknown suite options {sorted(unknown)}")
    psi = [rep.to_json() for r in range(1, 9) for rep in maps.psi_exchange_suite(r, cfg["relation_samples"], seed, tol)]
    retraction = [rep.to_json() for r in range(1, 9)
                  for rep in maps.retraction_suite(r, cfg["retraction_samples"], seed, tol)]
    hopf_specs = [maps.builtin_bilinear("complex")] + [maps.builtin_bilinear("poly", r=r) for r in range(1, 5)]
    hopf = [rep.to_json() for spec in hopf_specs for rep in maps.hopf_suite(spec, cfg["hopf_samples"], seed, tol)]
    result = {
        "version": __version__,
        "seed": seed,
        "tol": tol,
        "config": cfg,
        "relations": relation_block(seed, tol, cfg["relation_samples"]),
        "psi": psi,
        "retraction": retraction,
        "sections": section_block(seed, tol, cfg["section_pairs"], cfg["N"]),
        "hopf": hopf,
        "bounds": bounds_block(seed, tol, cfg["witness_samples"]),
    }
    return result


def dumps(result: dict) -> str:
    return json.dumps(result, sort_keys=True, allow_nan=False, indent=1)
