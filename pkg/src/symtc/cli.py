"""Command-line interface: ``symtc {plan, verify, bounds, table}``.

JSON output is the stable contract; every document echoes the seed,
tolerance, package version and the full parsed configuration.  Exit codes:
0 success / all checks pass, 1 a verification check failed, 2 usage error,
3 the input sits on a singular locus (diagonal pair, vanishing map, ...).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__
from . import bounds, geometry as geo, maps, planners
from .errors import SINGULAR_ERRORS, SymTCError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SINGULAR = 0, 1, 2, 3

BILINEAR_NAMES = ("complex", "quaternion", "octonion", "poly")
TARGETS = BILINEAR_NAMES + ("lens", "psi", "H", "hopf", "rotation", "lift")


class UsageError(Exception):
    pass


def parse_point(text: str) -> np.ndarray:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"bad point {text!r}; expected comma-separated numbers") from None
    return np.array(geo.normalize(vals).coords)


def parse_rho(text: str) -> range:
    try:
        if ".." in text:
            a, b = text.split("..")
            return range(int(a), int(b) + 1)
        return range(int(text), int(text) + 1)
    except ValueError:
        raise UsageError(f"bad rho range {text!r}; expected 'a..b' or 'a'") from None


def parse_map(name: str | None, r: int | None) -> maps.BilinearMapSpec:
    if name is None:
        raise UsageError("--map is required")
    kind, _, arg = name.partition(":")
    if kind not in BILINEAR_NAMES:
        raise UsageError(f"unknown map {name!r}; choose from {', '.join(BILINEAR_NAMES)}")
    if kind == "poly":
        r = int(arg) if arg else r
        if r is None:
            raise UsageError("poly needs a dimension: --map poly:3 or --r 3")
        return maps.builtin_bilinear("poly", r=r)
    return maps.builtin_bilinear(kind)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--tol", type=float, default=geo.TOL, help="residual tolerance (default 1e-9)")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--data", default=os.environ.get(bounds.KNOWN_RESULTS_ENV),
                        help=f"extra known-results file (default ${bounds.KNOWN_RESULTS_ENV})")

    p = argparse.ArgumentParser(prog="symtc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("plan", parents=[common], help="plan a path between two points")
    sp.add_argument("--space", required=True, help="rp:r | lens:n,m | cp:n | sphere:r")
    sp.add_argument("--map", help="bilinear map for the rotation planner (complex, poly:r, ...)")
    sp.add_argument("--planner", choices=("rotation", "lift"), help="default: rotation when --map is given")
    sp.add_argument("--from", dest="p1", required=True, help="comma-separated coordinates")
    sp.add_argument("--to", dest="p2", required=True)
    sp.add_argument("-N", type=int, default=planners.DEFAULT_N, help="path steps (default 64)")

    sv = sub.add_parser("verify", parents=[common], help="run numerical verification suites")
    sv.add_argument("--target", required=True, choices=TARGETS)
    sv.add_argument("--map", help="map for hopf/rotation targets")
    sv.add_argument("--r", type=int, help="projective dimension (psi, H, poly)")
    sv.add_argument("--space", help="space for lens/lift targets")
    sv.add_argument("--relation", action="append", help="relation(s) to check (default: the map's profile)")
    sv.add_argument("--samples", type=int, default=10_000, help="sample count (default 10^4)")
    sv.add_argument("-N", type=int, default=planners.DEFAULT_N)

    sb = sub.add_parser("bounds", parents=[common], help="report TC / TCS bounds for a space")
    sb.add_argument("--space", required=True)

    st = sub.add_parser("table", parents=[common], help="regenerate a tabulated result")
    st.add_argument("which", choices=("1", "2"))
    st.add_argument("--rho", default="1..4", help="rho range for table 2 (default 1..4)")
    return p


# ------------------------------------------------------------- commands


def cmd_plan(args) -> dict:
    space = geo.SpaceDescriptor.parse(args.space)
    kind = args.planner or ("rotation" if args.map else "lift")
    if kind == "rotation":
        spec = parse_map(args.map, None)
        planner = planners.rotation_planner(spec, N=args.N, seed=args.seed, tol=args.tol)
        if planner.space != space:
            raise UsageError(f"{spec.name} plans on {planner.space.tag}, not {space.tag}")
    else:
        planner = planners.lift_planner(space, N=args.N)
    path = planners.plan(planner, parse_point(args.p1), parse_point(args.p2))
    doc = path.to_json()
    bound = planners.step_bound(planner)
    doc.update(planner=planner.name, max_step=path.max_step(), step_bound=bound if bound < float("inf") else None)
    return {"path": doc, "pass": True, "_path": path}


def _relation_reports(spec, rels, args) -> list:
    return [maps.check_relations(spec, rel, args.samples, args.seed, args.tol) for rel in rels]


def cmd_verify(args) -> dict:
    t = args.target
    if t in BILINEAR_NAMES:
        spec = parse_map(t if t != "poly" else f"poly:{args.r}" if args.r else None, args.r)
        reports = _relation_reports(spec, args.relation or sorted(spec.relation_profile), args)
    elif t == "lens":
        space = geo.SpaceDescriptor.parse(args.space or "")
        if space.kind != "lens":
            raise UsageError("--target lens needs --space lens:n,m")
        spec = maps.builtin_bilinear("lens", n=space.n, m=space.m)
        reports = _relation_reports(spec, args.relation or sorted(spec.relation_profile), args)
    elif t in ("psi", "H"):
        if args.r is None:
            raise UsageError(f"--target {t} needs --r")
        if t == "psi":
            reports = maps.psi_exchange_suite(args.r, args.samples, args.seed, args.tol)
        else:
            reports = maps.retraction_suite(args.r, min(args.samples, 1000), args.seed, args.tol)
    elif t == "hopf":
        reports = maps.hopf_suite(parse_map(args.map, args.r), args.samples, args.seed, args.tol)
    elif t == "rotation":
        planner = planners.rotation_planner(parse_map(args.map, args.r), N=args.N, seed=args.seed, tol=args.tol)
        reports = [planners.verify_section(planner, args.samples, args.seed, args.tol)]
    else:
        planner = planners.lift_planner(geo.SpaceDescriptor.parse(args.space or ""), N=args.N)
        reports = [planners.verify_section(planner, args.samples, args.seed, args.tol)]
    docs = [r.to_json() for r in reports]
    return {"reports": docs, "pass": all(d["pass"] for d in docs)}


def cmd_bounds(args) -> dict:
    space = geo.SpaceDescriptor.parse(args.space)
    rep = bounds.bounds_for(space, bounds.load_known_results(args.data))
    return {"bounds": rep.to_json(), "pass": rep.consistent, "_report": rep}


def cmd_table(args) -> dict:
    records = bounds.load_known_results(args.data)
    table = bounds.table1() if args.which == "1" else bounds.table2(parse_rho(args.rho), records)
    return {"table": table, "pass": table["all_match"]}


COMMANDS = {"plan": cmd_plan, "verify": cmd_verify, "bounds": cmd_bounds, "table": cmd_table}


# ------------------------------------------------------------ rendering


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def render(doc: dict, fmt: str) -> str:
    if fmt == "json" or "error" in doc:
        public = {k: v for k, v in doc.items() if not k.startswith("_")}
        return json.dumps(public, sort_keys=True, allow_nan=False, indent=1)
    cmd = doc["command"]
    if cmd == "plan":
        path = doc["_path"]
        if fmt == "csv":
            return path.to_csv().rstrip("\n")
        head = (f"{doc['path']['planner']}  rule {path.rule_id}  N={path.N}  "
                f"max step {doc['path']['max_step']:.6g} (bound {doc['path']['step_bound']})")
        return "\n".join([head] + [" ".join(f"{v: .9f}" for v in row) for row in path.reps])
    if cmd == "verify":
        if fmt == "csv":
            rows = [["name", "check", "max_residual", "pass"]]
            for r in doc["reports"]:
                name = r.get("map", r.get("planner"))
                check = r.get("relation", "section")
                res = r.get("max_residual", r.get("max_step"))
                rows.append([name, check, res, r["pass"]])
            return _csv(rows).rstrip("\n")
        lines = []
        for r in doc["reports"]:
            if "relation" in r:
                res = r["max_residual"]
                lines.append(f"{'PASS' if r['pass'] else 'FAIL'}  {r['map']:<24} {r['relation']:<22} "
                             f"residual {res if res is None else format(res, '.3e')}")
            else:
                bad = [k for k, ok in r["checks"].items() if not ok]
                lines.append(f"{'PASS' if r['pass'] else 'FAIL'}  {r['planner']:<24} section "
                             f"{'all checks' if not bad else 'failed: ' + ', '.join(bad)}")
        return "\n".join(lines)
    if cmd == "bounds":
        rep = doc["_report"]
        if fmt == "csv":
            rows = [["quantity", "kind", "value", "provenance"]]
            rows += [[f.quantity, f.kind, f.value, f.provenance] for f in rep.facts]
            return _csv(rows).rstrip("\n")
        return rep.to_text()
    table = doc["table"]
    if table["table"] == 1:
        rows = [["r", "u", "l", "match"]] + [[c["r"], c["u"], c["l"], c["match"]] for c in table["columns"]]
    else:
        rows = [["rho", "n", "quantity", "column", "value", "source", "match", "extrapolated"]]
        for row in table["rows"]:
            for c in row["cells"]:
                rows.append([row["rho"], row["n"], c["quantity"], c["column"], c["value"], c["source"],
                             c["match"], row["extrapolated"]])
    if fmt == "csv":
        return _csv(rows).rstrip("\n")
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(str(v).ljust(w) for v, w in zip(r, widths)) for r in rows)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("format",)}
    doc = {"command": args.command, "version": __version__, "seed": args.seed, "tol": args.tol,
           "config": config}
    code = EXIT_OK
    try:
        doc.update(COMMANDS[args.command](args))
        if not doc["pass"]:
            code = EXIT_FAIL
    except SINGULAR_ERRORS as exc:
        doc["error"] = {"error": type(exc).__name__, "message": str(exc)}
        code = EXIT_SINGULAR
    except (UsageError, SymTCError, ValueError) as exc:
        doc["error"] = {"error": type(exc).__name__, "message": str(exc)}
        code = EXIT_USAGE
    print(render(doc, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
