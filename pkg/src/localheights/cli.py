"""Command-line entry point.

Exit codes: 0 methods agree, 1 schema error, 2 hypothesis failure, 3 mismatch.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import arch, nonarch, selftest
from .building import (
    DimensionMismatch,
    RankDeficient,
    Subspace,
    class_of,
    combinatorial_distance,
    half_geodesic,
    reduction_segment_equal,
)
from .io import SchemaError, dumps, parse_building_query, parse_instance
from .symspace import NoRoot

EXIT_OK, EXIT_SCHEMA, EXIT_HYPOTHESIS, EXIT_MISMATCH = 0, 1, 2, 3
ARCH_TOL = 1e-8


def _finite_result(doc) -> tuple[dict, int]:
    quad, L_A, L_B = doc.nonarch()
    res = {"place": "finite", "prime": quad.ctx.prime, "n": quad.n, "p": quad.p, "q": quad.q, "values": {}}
    improper = quad.improper_pairs()
    if improper:
        res["status"] = "hypothesis_failure"
        res["diagnostics"] = {"condition": "proper_intersection", "nonzero": ["%s∩%s" % (a, b) for a, b in improper]}
        return res, EXIT_HYPOTHESIS
    res["values"]["algebraic"] = nonarch.intersection_algebraic(quad)
    try:
        g = nonarch.intersection_geometric_details(quad, L_A, L_B)
    except nonarch.HypothesesFailed as exc:
        res["status"] = "hypothesis_failure"
        res["diagnostics"] = {"condition": exc.condition, "message": str(exc)}
        return res, EXIT_HYPOTHESIS
    except nonarch.GateNotFound as exc:
        res["status"] = "hypothesis_failure"
        res["diagnostics"] = {"condition": "gate", "message": str(exc)}
        return res, EXIT_HYPOTHESIS
    res["values"]["geometric"] = g.value
    res["method"] = "both"
    if g.degenerate:
        res["diagnostics"] = {"degenerate": g.degenerate}
    else:
        res["distor"] = g.distor
        res["gates"] = {"A": g.gate_A.to_strings(), "B": g.gate_B.to_strings(), "k_A": g.k_A, "k_B": g.k_B}
        res["diagnostics"] = dict(g.diagnostics, constructive_agrees=g.constructive_agrees)
    agree = res["values"]["algebraic"] == g.value
    res["agree"] = agree
    res["status"] = "ok" if agree else "mismatch"
    return res, EXIT_OK if agree else EXIT_MISMATCH


def _arch_result(doc) -> tuple[dict, int]:
    quad = doc.arch()
    res = {"place": "archimedean", "n": quad.n, "p": quad.p, "q": quad.q, "values": {}}
    improper = quad.improper_pairs()
    if improper:
        res["status"] = "hypothesis_failure"
        res["diagnostics"] = {"condition": "proper_intersection", "nonzero": ["%s∩%s" % (a, b) for a, b in improper]}
        return res, EXIT_HYPOTHESIS
    try:
        res["values"]["closed_form"] = arch.intersection_closed_form(quad)
        g = arch.intersection_geometric_details(quad)
    except arch.HypothesesFailed as exc:
        res["status"] = "hypothesis_failure"
        res["diagnostics"] = {"condition": exc.condition, "message": str(exc)}
        return res, EXIT_HYPOTHESIS
    except NoRoot as exc:
        res["status"] = "hypothesis_failure"
        res["diagnostics"] = {"condition": "gate", "message": str(exc)}
        return res, EXIT_HYPOTHESIS
    res["values"]["geometric"] = g.value
    if quad.p == 1:
        res["values"]["levine"] = arch.levine_pairing_p1(quad)
    if g.degenerate:
        res["diagnostics"] = {"degenerate": g.degenerate}
    else:
        res.update(alpha=g.alpha, beta=g.beta, distor=g.distor, gates={"t_A": g.t_A, "t_B": g.t_B})
        res["diagnostics"] = {"residual_A": g.residual_A, "residual_B": g.residual_B}
    vals = list(res["values"].values())
    agree = max(vals) - min(vals) <= ARCH_TOL
    res["agree"] = agree
    res["status"] = "ok" if agree else "mismatch"
    return res, EXIT_OK if agree else EXIT_MISMATCH


def cmd_intersect(text: str) -> tuple[dict, int]:
    doc = parse_instance(text)
    return _finite_result(doc) if doc.finite else _arch_result(doc)


def cmd_building(sub: str, text: str) -> tuple[dict, int]:
    q = parse_building_query(text)
    ctx = q["ctx"]
    x = class_of(q["x"], ctx)
    if sub == "half-geodesic":
        if "W" not in q or "k_max" not in q:
            raise SchemaError("half-geodesic needs W and k_max")
        verts = half_geodesic(x, Subspace(q["W"]), q["k_max"])
        return {"vertices": [v.to_strings() for v in verts]}, EXIT_OK
    if sub == "distance":
        if "y" not in q:
            raise SchemaError("distance needs y")
        return {"distance": combinatorial_distance(x, class_of(q["y"], ctx))}, EXIT_OK
    if sub == "reduction-equal":
        if not {"W1", "W2", "m"} <= q.keys():
            raise SchemaError("reduction-equal needs W1, W2 and m")
        eq = reduction_segment_equal(x, Subspace(q["W1"]), Subspace(q["W2"]), q["m"])
        return {"equal": eq}, EXIT_OK
    raise SchemaError(f"unknown building subcommand {sub!r}")


def _emit(obj, args, text=None) -> None:
    if args.json or args.pretty:
        print(dumps(obj, pretty=args.pretty))
    elif text is not None:
        print(text)
    else:
        print(dumps(obj, pretty=True))


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _intersect_text(res: dict) -> str:
    lines = [f"place: {res['place']}" + (f" (p = {res['prime']})" if "prime" in res else "")]
    for k, v in res.get("values", {}).items():
        lines.append(f"{k}: {v}")
    if "distor" in res:
        lines.append(f"distor: {res['distor']}")
    lines.append(f"status: {res['status']}")
    if res["status"] == "hypothesis_failure":
        lines.append(f"condition: {res['diagnostics'].get('condition')}")
    return "\n".join(lines)


class _Parser(argparse.ArgumentParser):
    # usage errors share the schema-error exit code; 2 is reserved
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_SCHEMA, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="localheights", description=__doc__.splitlines()[0])
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--json", action="store_true", help="compact JSON output")
    fmt.add_argument("--pretty", action="store_true", help="indented JSON output")
    fmt.add_argument("--timing", action="store_true", help="include wall-clock time (breaks byte determinism)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("intersect", parents=[fmt], help="local intersection number of an instance document")
    p.add_argument("file")

    p = sub.add_parser("building", parents=[fmt], help="queries on the Bruhat-Tits building")
    p.add_argument("subcommand", choices=["half-geodesic", "distance", "reduction-equal"])
    p.add_argument("file")

    p = sub.add_parser("selftest", parents=[fmt], help="seeded verification over generated instances")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--sizes", default="2,3,4", help="comma-separated ambient dimensions")
    p.add_argument("--workers", type=int, default=1)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        if args.command == "intersect":
            res, code = cmd_intersect(_read(args.file))
            text = _intersect_text(res)
        elif args.command == "building":
            res, code = cmd_building(args.subcommand, _read(args.file))
            text = None
        else:
            sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
            res = selftest.run(args.seed, args.count, sizes, args.workers)
            code = EXIT_OK if res["ok"] else EXIT_MISMATCH
            text = selftest.format_table(res)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (RankDeficient, DimensionMismatch, ValueError) as exc:
        if isinstance(exc, (nonarch.HypothesesFailed, arch.HypothesesFailed)):
            print(f"hypothesis failure: {exc}", file=sys.stderr)
            return EXIT_HYPOTHESIS
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    if args.timing:
        res["timing_seconds"] = round(time.perf_counter() - t0, 6)
        if text is not None:
            text += f"\ntime: {res['timing_seconds']:.3f}s"
    _emit(res, args, text)
    return code


if __name__ == "__main__":
    sys.exit(main())
