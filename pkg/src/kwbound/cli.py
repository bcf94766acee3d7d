"""Command-line front end.

Exit codes: 0 success, 1 a verification found the certificate infeasible,
2 invalid input, 3 a search budget ran out.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys

from .boolfunc import (BooleanFunction, brute_force_formula_size, formula_size,
                       formula_to_json, maxterms, minterms)
from .builders import build_brec, build_urec, cert_brec2, cert_maj, cert_maj3
from .certificates import DualCertificate, verify_certificate
from .commmatrix import CommMatrix
from .lp import rational_str
from .report import (FAMILIES, METHODS, BudgetExhausted, default_budget, emit,
                     family_formula, family_function, family_matrix, full_matrix,
                     paper_table, report)

EXIT_OK, EXIT_INFEASIBLE, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _positive(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _add_family(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--family", choices=FAMILIES, required=required)
    p.add_argument("--l", type=int, help="MAJ parameter, arity 2l+1")
    p.add_argument("--h", type=int, help="recursion depth for urec/brec")


def _param(args) -> int:
    if args.family == "maj":
        if args.l is None:
            raise UsageError("--family maj needs --l")
        return args.l
    if args.h is None:
        raise UsageError(f"--family {args.family} needs --h")
    return args.h


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kwbound",
                                     description="Formula-size lower bounds from cover LPs.")
    parser.add_argument("--node-budget", type=_positive, default=None,
                        help="oracle node cap (default from KWBOUND_NODE_BUDGET)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="emit a family member as JSON")
    _add_family(p)
    p.add_argument("--what", choices=("function", "minterms", "maxterms", "formula",
                                      "certificate"), default="function")

    p = sub.add_parser("matrix", help="emit a communication matrix")
    _add_family(p, required=False)
    p.add_argument("--restriction", choices=("submatrix", "terms"), default="submatrix")
    p.add_argument("--function", help="function JSON file; builds its terms matrix")
    p.add_argument("--mode", choices=("general", "monotone"), default="general",
                   help="cell rule when building from --function")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")

    p = sub.add_parser("bound", help="compute lower/upper bounds")
    _add_family(p)
    p.add_argument("--method", action="append", choices=METHODS + ("all",),
                   help="repeatable; default lp")
    p.add_argument("--format", choices=("json", "csv", "text"), default=None,
                   help="default: bare value for one method, text table otherwise")
    p.add_argument("--omit-timing", action="store_true", help="report ms as 0")

    p = sub.add_parser("verify", help="verify a dual certificate")
    _add_family(p, required=False)
    p.add_argument("--builtin-cert", action="store_true")
    p.add_argument("--cert", help="certificate JSON file")
    p.add_argument("--matrix", help="matrix JSON file when the certificate names it")

    p = sub.add_parser("brute", help="minimal formula size by exhaustive search")
    _add_family(p, required=False)
    p.add_argument("--function", help="function JSON file")
    p.add_argument("--monotone", action="store_true")
    p.add_argument("--cap", type=int, default=10)
    p.add_argument("--memory-budget", type=_positive, default=20_000_000)

    p = sub.add_parser("table", help="recompute the paper's table")
    p.add_argument("which", choices=("paper",))
    p.add_argument("--full", action="store_true", help="add the l=3 and h=3 rows")
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")
    p.add_argument("--omit-timing", action="store_true", help="report ms as 0")
    return parser


def _read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _builtin_cert(family: str, param: int, budget: int) -> DualCertificate:
    if family == "maj":
        if param == 1:
            return cert_maj3()
        return cert_maj(param)
    if family == "brec" and param == 2:
        return cert_brec2()
    builder = build_urec if family == "urec" else build_brec
    return builder(param, node_budget=budget, fallback=False).scheme


def _cmd_gen(args, out) -> int:
    param = _param(args)
    if args.what == "certificate":
        out.write(_builtin_cert(args.family, param, default_budget()).dumps() + "\n")
        return EXIT_OK
    if args.what == "formula":
        phi = family_formula(args.family, param)
        if phi is None:
            raise UsageError(f"no formula construction for {args.family} {param}")
        out.write(json.dumps({"size": formula_size(phi), "formula": formula_to_json(phi)})
                  + "\n")
        return EXIT_OK
    f = family_function(args.family, param)
    if args.what == "function":
        out.write(json.dumps(f.to_json()) + "\n")
        return EXIT_OK
    terms = minterms(f) if args.what == "minterms" else maxterms(f)
    out.write(json.dumps({"n": f.n, "kind": terms.kind, "terms": terms.strings()}) + "\n")
    return EXIT_OK


def _cmd_matrix(args, out) -> int:
    if args.function:
        from .commmatrix import build_matrix
        m = build_matrix(BooleanFunction.from_json(_read_json(args.function)), args.mode,
                         "terms")
    else:
        if args.family is None:
            raise UsageError("matrix needs --family or --function")
        param = _param(args)
        if args.restriction == "terms":
            m = full_matrix(args.family, param)
        else:
            m = family_matrix(args.family, param)
    if args.format == "json":
        out.write(json.dumps(m.to_json()) + "\n")
    elif args.format == "csv":
        out.write(m.to_csv())
    else:
        out.write(_grid(m))
    return EXIT_OK


def _grid(m: CommMatrix) -> str:
    """Aligned plain-text rendering, cells as comma-joined indices."""
    rows, cols = m.shape
    table = [[""] + [m.col_label(c) for c in range(cols)]]
    for r in range(rows):
        table.append([m.row_label(r)] + [",".join(map(str, m.cell(r, c))) for c in range(cols)])
    width = max(len(x) for line in table for x in line)
    return "".join(" ".join(x.rjust(width) for x in line) + "\n" for line in table)


def _exit_for(reports) -> int:
    if any(r.status == "infeasible" for r in reports):
        return EXIT_INFEASIBLE
    if any(r.status in ("budget", "interval") for r in reports):
        return EXIT_BUDGET
    return EXIT_OK


def _cmd_bound(args, out) -> int:
    param = _param(args)
    methods = args.method or ["lp"]
    reps = report(args.family, param, methods, args.node_budget)
    if args.omit_timing:
        for r in reps:
            r.ms = 0
    if args.format is None and len(reps) == 1:
        r = reps[0]
        out.write(("undetermined" if r.value is None else rational_str(r.value)) + "\n")
    else:
        out.write(emit(reps, args.format or "text"))
    return _exit_for(reps)


def _cmd_verify(args, out) -> int:
    budget = args.node_budget or default_budget()
    if args.builtin_cert:
        if args.family is None:
            raise UsageError("--builtin-cert needs --family")
        cert = _builtin_cert(args.family, _param(args), budget)
    elif args.cert:
        doc = _read_json(args.cert)
        matrix = None
        if args.matrix:
            matrix = CommMatrix.from_json(_read_json(args.matrix))
        elif not isinstance(doc.get("matrix"), dict):
            if args.family is None:
                raise UsageError("certificate names its matrix; pass --matrix or --family")
            matrix = family_matrix(args.family, _param(args))
        cert = DualCertificate.from_json(doc, matrix)
    else:
        raise UsageError("verify needs --builtin-cert or --cert")
    v = verify_certificate(cert.matrix, cert, node_budget=budget)
    out.write(v.summary() + "\n")
    for problem in v.problems:
        out.write(f"problem: {problem}\n")
    for rect, value in v.violations:
        out.write(f"violation: {json.dumps(rect.to_json())} value {rational_str(value)}\n")
    if not v.declared_matches:
        out.write(f"note: declared objective {rational_str(cert.objective)} differs\n")
    if v.feasible is None:
        return EXIT_BUDGET
    return EXIT_OK if v.feasible else EXIT_INFEASIBLE


def _cmd_brute(args, out) -> int:
    if args.function:
        f = BooleanFunction.from_json(_read_json(args.function))
    elif args.family:
        f = family_function(args.family, _param(args))
    else:
        raise UsageError("brute needs --family or --function")
    res = brute_force_formula_size(f, args.monotone, args.cap, args.memory_budget)
    if res.size is None:
        out.write(f"exceeds cap ({res.reason})\n")
        return EXIT_BUDGET if res.reason == "memory" else EXIT_OK
    out.write(f"{res.size}\n")
    return EXIT_OK


def _cmd_table(args, out) -> int:
    reps = paper_table(full=args.full, node_budget=args.node_budget)
    if args.omit_timing:
        for r in reps:
            r.ms = 0
    out.write(emit(reps, args.format))
    return _exit_for(reps)


COMMANDS = {"gen": _cmd_gen, "matrix": _cmd_matrix, "bound": _cmd_bound,
            "verify": _cmd_verify, "brute": _cmd_brute, "table": _cmd_table}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return COMMANDS[args.command](args, out)
    except BudgetExhausted as exc:
        err.write(f"budget exhausted: {exc}\n")
        return EXIT_BUDGET
    except (UsageError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        err.write(f"error: {exc}\n")
        parser.print_usage(err)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())
