"""Command-line driver.

Exit status: 0 optimal or feasible, 1 infeasible, 2 unbounded, 3 the
brute-force check disagreed, 64 usage error, 65 bad input data, 70 a size
cap was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import blocks
from .augment import Backend
from .errors import DecompositionError, InstanceError, LimitError, TdipError
from .formats import ParseError, dumps, instance_to_dict, parse_instance, parse_td
from .graver import enumerate_graver_small
from .instance import SparseIntMatrix, validate_instance
from .oracle import BRUTE_CAP, brute_force_solve
from .report import INFEASIBLE, OPTIMAL, UNBOUNDED
from .scaling import solve_relaxation_eps
from .solver import ALGOS, MODES, choose_decomposition, solve
from .structure import DUAL, PRIMAL, build_dual_graph, build_primal_graph, verify_td_decomposition

EXIT_OK, EXIT_INFEASIBLE, EXIT_UNBOUNDED, EXIT_MISMATCH = 0, 1, 2, 3
EXIT_USAGE, EXIT_DATA, EXIT_LIMIT = 64, 65, 70

STATUS_EXIT = {OPTIMAL: EXIT_OK, INFEASIBLE: EXIT_INFEASIBLE, UNBOUNDED: EXIT_UNBOUNDED}


class UsageError(TdipError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _emit(doc, path: str | None = None) -> None:
    text = dumps(doc)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def _rho(text: str):
    return int(text) if text.lstrip("-").isdigit() else text


def _load_json_arg(text: str):
    """Inline JSON, or @path to read it from a file."""
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON argument: {e.msg}", e.lineno, e.colno) from None


def _load_matrix(path: str) -> SparseIntMatrix:
    """An instance document, or {"dense": [[...], ...]}."""
    with open(path, encoding="utf-8") as fh:
        doc = _load_json_arg(fh.read())
    if isinstance(doc, dict) and "dense" in doc:
        return SparseIntMatrix.from_dense(doc["dense"])
    return parse_instance(path).a


def cmd_solve(args) -> int:
    inst = parse_instance(args.instance)
    td = parse_td(args.td) if args.td else None
    start = time.perf_counter()
    rep = solve(inst, args.algo, args.mode, td, _rho(args.rho))
    elapsed = time.perf_counter() - start
    code = STATUS_EXIT[rep.status]
    if args.verify_brute_force:
        size = 1
        for l, u in zip(inst.lower, inst.upper):
            size *= max(0, u - l + 1) if inst.finite_bounds() else 0
        if not inst.finite_bounds() or size > BRUTE_CAP:
            rep.details["brute_force"] = {"checked": False}
        else:
            ref = brute_force_solve(inst)
            agree = ref.status == rep.status and ref.value == rep.value
            rep.details["brute_force"] = {"checked": True, "status": ref.status,
                                          "value": ref.value, "agrees": agree}
            if not agree:
                print(f"brute force disagrees: {ref.status} {ref.value} vs {rep.status} {rep.value}",
                      file=sys.stderr)
                code = EXIT_MISMATCH
    doc = rep.to_json()
    if args.timing:
        doc["timing_seconds"] = round(elapsed, 6)
    _emit(doc, args.report)
    return code


def cmd_graver(args) -> int:
    a = _load_matrix(args.matrix)
    basis = enumerate_graver_small(a, args.radius)
    _emit(basis.to_json())
    return EXIT_OK


def cmd_check(args) -> int:
    inst = parse_instance(args.instance)
    rep = validate_instance(inst)
    doc = {"valid": rep.ok, "problems": list(rep.problems)}
    ok = rep.ok
    if args.td:
        td = parse_td(args.td)
        graph = build_primal_graph(inst.a) if td.orientation == PRIMAL else build_dual_graph(inst.a)
        fits = verify_td_decomposition(graph, td)
        prof = td.profile
        doc["decomposition"] = {"orientation": td.orientation, "fits": fits, "height": td.height,
                                "ttd": prof.ttd, "levels": list(prof.levels)}
        ok = ok and fits
    elif rep.ok:
        try:
            algo, td = choose_decomposition(inst.a)
            doc["decomposition"] = {"orientation": td.orientation, "height": td.height,
                                    "ttd": td.ttd, "parent": list(td.parent)}
        except LimitError as e:
            doc["decomposition"] = {"error": str(e)}
    _emit(doc)
    return EXIT_OK if ok else EXIT_DATA


def cmd_relax(args) -> int:
    inst = parse_instance(args.instance)
    try:
        eps = Fraction(args.eps)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--eps expects a rational such as 1/4, got {args.eps!r}") from None
    algo, td = choose_decomposition(inst.a, args.algo)
    rel = solve_relaxation_eps(inst, eps, Backend(algo, _rho(args.rho)), td)
    doc = {"status": rel.report.status, "p": rel.p, "factor": rel.factor,
           "x": [str(v) for v in rel.x], "eps": str(eps)}
    _emit(doc)
    return STATUS_EXIT[rel.report.status]


def cmd_model(args) -> int:
    p = _load_json_arg(args.params)
    kind = args.kind
    if kind in ("qcmax", "table3"):
        if kind == "qcmax":
            inst, td = blocks.model_scheduling_qcmax([Fraction(s) for s in p["speeds"]], p["counts"],
                                                     Fraction(p["cmax"]), with_td=True)
        else:
            inst, td = blocks.model_three_way_table(p["u"], p["v"], p["w"], with_td=True)
        doc = instance_to_dict(inst)
    else:
        if kind == "nfold":
            a, td = blocks.build_nfold(p["a1"], p["a2"], p["n"])
        elif kind == "two-stage":
            a, td = blocks.build_two_stage(p["a1"], p["a2"], p["n"])
        elif kind == "tree-fold":
            a, td = blocks.build_tree_fold(p["tree"], p["blocks"])
        else:
            a, td = blocks.build_multi_stage(p["tree"], p["blocks"])
        doc = {"rows": a.rows, "cols": a.cols, "matrix": [list(e) for e in a.entries]}
    if args.td_out:
        with open(args.td_out, "w", encoding="utf-8") as fh:
            fh.write(dumps(td.to_json()) + "\n")
    _emit(doc)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tdip", description="Separable convex integer programming by Graver augmentation "
                                          "over treedepth decompositions.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    s.add_argument("--algo", choices=ALGOS, default="auto")
    s.add_argument("--mode", choices=MODES, default="basic")
    s.add_argument("--td", help="decomposition JSON file")
    s.add_argument("--rho", default="auto", help="auto, enum, formula or an integer")
    s.add_argument("--verify-brute-force", action="store_true")
    s.add_argument("--report", help="also write the report to this file")
    s.add_argument("--timing", action="store_true", help="add wall-clock time to the report")
    s.set_defaults(run=cmd_solve)

    g = sub.add_parser("graver", help="enumerate a Graver basis")
    g.add_argument("matrix", help='instance file or {"dense": [[...]]}')
    g.add_argument("--radius", type=int, default=None)
    g.set_defaults(run=cmd_graver)

    c = sub.add_parser("check", help="validate an instance and a decomposition")
    c.add_argument("instance")
    c.add_argument("--td")
    c.set_defaults(run=cmd_check)

    r = sub.add_parser("relax", help="epsilon-accurate continuous relaxation")
    r.add_argument("instance")
    r.add_argument("--eps", required=True)
    r.add_argument("--algo", choices=ALGOS, default="auto")
    r.add_argument("--rho", default="auto")
    r.set_defaults(run=cmd_relax)

    m = sub.add_parser("model", help="emit a block-structured matrix or model instance")
    m.add_argument("kind", choices=("nfold", "two-stage", "tree-fold", "multi-stage", "qcmax", "table3"))
    m.add_argument("--params", required=True, help="JSON parameters, or @file")
    m.add_argument("--td-out", help="write the canonical decomposition here")
    m.set_defaults(run=cmd_model)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.run(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except LimitError as e:
        print(f"limit exceeded: {e}", file=sys.stderr)
        return EXIT_LIMIT
    except (ParseError, InstanceError, DecompositionError, KeyError, ValueError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"cannot read input: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
