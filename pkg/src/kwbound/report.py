"""Run the bound methods on a family member and render the results."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction

from .boolfunc import (brec_formula, brec_maj, brute_force_formula_size, formula_size,
                       maj, maj3_formula, urec_formula, urec_maj)
from .bounds import DEFAULT_NODE_BUDGET, lp_bound, strengthened_bound
from .builders import build_brec, build_urec, cert_brec2, cert_maj, cert_maj3
from .certificates import CliqueSpec, RankSpec, verify_certificate
from .commmatrix import (CommMatrix, brec2_submatrix, brec_submatrix, build_matrix,
                         maj_matrix, urec_submatrix)
from .lp import rational_str
from .rects import EnumerationCapExceeded, enumerate_all_mono_rects
from .search import min_disjoint_cover

FAMILIES = ("maj", "urec", "brec")
METHODS = ("lp", "lp-full", "lp+clique", "cover", "certificate", "brute", "upper-formula")
BUDGET_ENV = "KWBOUND_NODE_BUDGET"
COVER_CELL_CAP = 200
ENUM_CAP = 200_000
FULL_LP_SECONDS = 600  # the full terms matrices can be far larger than the submatrices


def default_budget() -> int:
    value = os.environ.get(BUDGET_ENV)
    if value is None:
        return DEFAULT_NODE_BUDGET
    budget = int(value)
    if budget <= 0:
        raise ValueError(f"{BUDGET_ENV} must be positive")
    return budget


class BudgetExhausted(RuntimeError):
    pass


@dataclass
class BoundReport:
    family: str
    param: int
    matrix: str
    method: str
    value: Fraction | None  # None: not determined (see status)
    integral: int | None  # ceiling of a lower bound, or the size of an upper formula
    status: str  # optimal | verified | fallback | interval | exceeds-cap | budget | infeasible
    ms: int
    note: str = ""

    def to_json(self) -> dict:
        return {"family": self.family, "param": self.param, "matrix": self.matrix,
                "method": self.method,
                "value": None if self.value is None else rational_str(self.value),
                "integral_bound": self.integral, "status": self.status, "ms": self.ms,
                "note": self.note}


# -- family members ----------------------------------------------------------

def check_family(family: str, param: int) -> None:
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if family == "maj" and not 1 <= param <= 11:
        raise ValueError("maj needs 1 <= l <= 11")
    if family == "urec" and not 1 <= param <= 11:
        raise ValueError("urec needs 1 <= h <= 11")
    if family == "brec" and not 1 <= param <= 3:
        raise ValueError("brec needs 1 <= h <= 3")


def family_function(family: str, param: int):
    check_family(family, param)
    if family == "maj":
        return maj(2 * param + 1)
    if family == "urec":
        return urec_maj(param)
    return brec_maj(param)


def family_matrix(family: str, param: int) -> CommMatrix:
    """The matrix the family's theorem is proved on."""
    check_family(family, param)
    if family == "maj":
        return maj_matrix(param)
    if family == "urec":
        if param > 5:
            raise ValueError("urec submatrices need h <= 5")
        return urec_submatrix(param)[0]
    if param == 2:
        return brec2_submatrix()[0]
    return brec_submatrix(param)[0]


def full_matrix(family: str, param: int) -> CommMatrix:
    """Rows all minterms, columns all maxterms."""
    mode = "monotone" if family == "brec" else "general"
    return build_matrix(family_function(family, param), mode, "terms")


def family_formula(family: str, param: int):
    check_family(family, param)
    if family == "urec":
        return urec_formula(param)
    if family == "brec":
        return brec_formula(param)
    if param == 1:
        return maj3_formula()
    return None


def family_groups(family: str, param: int):
    """Clique and rank families used by the strengthened LP, all multipliers zero."""
    check_family(family, param)
    if family == "maj":
        cert = cert_maj3() if param == 1 else cert_maj(param)
    elif family == "urec":
        cert = build_urec(param, fallback=False, node_budget=1).scheme
    elif param == 2:
        cert = cert_brec2()
    else:
        cert = build_brec(param, fallback=False, node_budget=1).scheme
    cliques = [CliqueSpec(q.pairs, Fraction(0), q.label) for q in cert.cliques]
    ranks = [RankSpec(g.pairs, g.alpha, g.witness, Fraction(0), g.label) for g in cert.ranks]
    return cliques, ranks


def applicable(family: str, param: int, method: str) -> bool:
    if method == "lp-full":
        return family == "brec" and param == 2 or family != "brec" and param <= 2
    if method == "lp+clique":
        return (family == "maj" and param <= 3 or family == "urec" and 2 <= param <= 3
                or family == "brec" and 2 <= param <= 3)
    if method == "cover":
        return family in ("maj", "urec") and param == 1
    if method == "certificate":
        return (family == "maj" and param <= 3 or family in ("urec", "brec") and 2 <= param <= 3)
    if method == "brute":
        return family_function(family, param).n <= 5
    if method == "upper-formula":
        return family_formula(family, param) is not None
    return method == "lp" and (family != "maj" or param <= 3)


# -- running methods -----------------------------------------------------------

def _matrix_id(family: str, param: int, which: str = "") -> str:
    name = {"maj": f"maj l={param}", "urec": f"urec h={param}", "brec": f"brec h={param}"}[family]
    return f"{name} {which}".strip()


def _lp_report(res, family, param, matrix_id, method, ms) -> BoundReport:
    if res.final:
        return BoundReport(family, param, matrix_id, method, res.lower, math.ceil(res.lower),
                           "optimal", ms)
    return BoundReport(family, param, matrix_id, method, res.lower, math.ceil(res.lower),
                       "interval", ms, f"optimum in [{res.lower}, {res.upper}]")


def run_method(family: str, param: int, method: str,
               node_budget: int | None = None) -> BoundReport:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    check_family(family, param)
    if not applicable(family, param, method):
        raise ValueError(f"method {method} is not available for {family} {param}")
    budget = default_budget() if node_budget is None else node_budget
    start = time.perf_counter()

    def elapsed() -> int:
        return round((time.perf_counter() - start) * 1000)

    if method == "lp":
        res = lp_bound(family_matrix(family, param), node_budget=budget)
        return _lp_report(res, family, param, _matrix_id(family, param, "submatrix"), method,
                          elapsed())
    if method == "lp-full":
        res = lp_bound(full_matrix(family, param), node_budget=budget,
                       time_budget=FULL_LP_SECONDS)
        return _lp_report(res, family, param, _matrix_id(family, param, "terms"), method,
                          elapsed())
    if method == "lp+clique":
        cliques, ranks = family_groups(family, param)
        res = strengthened_bound(family_matrix(family, param), cliques, ranks,
                                 node_budget=budget)
        return _lp_report(res, family, param, _matrix_id(family, param, "submatrix"), method,
                          elapsed())
    if method == "cover":
        m = family_matrix(family, param)
        if m.n_cells > COVER_CELL_CAP:
            raise ValueError(f"cover search needs at most {COVER_CELL_CAP} cells")
        try:
            rects = enumerate_all_mono_rects(m, cap=ENUM_CAP)
        except EnumerationCapExceeded as exc:
            raise BudgetExhausted(str(exc)) from exc
        res = min_disjoint_cover(m, rects, node_budget=budget)
        if res.count is None:
            return BoundReport(family, param, _matrix_id(family, param), method,
                               Fraction(res.lower), res.lower, "budget", elapsed(),
                               f"cover number >= {res.lower}")
        return BoundReport(family, param, _matrix_id(family, param), method,
                           Fraction(res.count), res.count, "optimal", elapsed())
    if method == "certificate":
        return _certificate_report(family, param, budget, start)
    if method == "brute":
        res = brute_force_formula_size(family_function(family, param),
                                       monotone_only=family == "brec")
        if res.size is None:
            return BoundReport(family, param, "function", method, None, None, "exceeds-cap",
                               elapsed(), f"limit: {res.reason}")
        return BoundReport(family, param, "function", method, Fraction(res.size), res.size,
                           "optimal", elapsed())
    phi = family_formula(family, param)
    size = formula_size(phi)
    return BoundReport(family, param, "function", method, Fraction(size), size, "upper",
                       elapsed(), "monotone formula")


def _certificate_report(family: str, param: int, budget: int, start: float) -> BoundReport:
    mid = _matrix_id(family, param, "submatrix")
    if family == "maj" or family == "brec" and param == 2:
        cert = {"maj": lambda: cert_maj3() if param == 1 else cert_maj(param),
                "brec": cert_brec2}[family]()
        v = verify_certificate(cert.matrix, cert, node_budget=budget)
        ms = round((time.perf_counter() - start) * 1000)
        if v.feasible is None:
            return BoundReport(family, param, mid, "certificate", None, None, "budget", ms)
        if not v.feasible:
            return BoundReport(family, param, mid, "certificate", None, None, "infeasible", ms,
                               "; ".join(v.problems[:2]) or "violated rectangle found")
        return BoundReport(family, param, mid, "certificate", v.objective,
                           math.ceil(v.objective), "verified", ms)
    builder = build_urec if family == "urec" else build_brec
    built = builder(param, node_budget=budget)
    ms = round((time.perf_counter() - start) * 1000)
    note = "; ".join(built.notes)
    if built.accepted:
        return BoundReport(family, param, mid, "certificate", built.value,
                           math.ceil(built.value), "verified", ms, note)
    if built.fallback is None:
        return BoundReport(family, param, mid, "certificate", None, None, "budget", ms, note)
    status = "fallback" if built.fallback.final else "interval"
    return BoundReport(family, param, mid, "certificate", built.value, math.ceil(built.value),
                       status, ms, note)


def report(family: str, param: int, methods=("all",),
           node_budget: int | None = None) -> list[BoundReport]:
    """Run each requested method; "all" expands to every method that applies."""
    check_family(family, param)
    chosen = []
    for method in methods:
        if method == "all":
            chosen += [mt for mt in METHODS if applicable(family, param, mt)]
        else:
            chosen.append(method)
    return [run_method(family, param, mt, node_budget) for mt in dict.fromkeys(chosen)]


# -- the paper table ---------------------------------------------------------

PAPER_ROWS = [
    ("maj", 1, ("lp+clique", "upper-formula")),
    ("maj", 2, ("certificate",)),
    ("urec", 2, ("certificate", "upper-formula")),
    ("brec", 2, ("certificate",)),
]
PAPER_ROWS_FULL = [
    ("maj", 3, ("certificate",)),
    ("urec", 3, ("certificate", "upper-formula")),
]


def paper_table(full: bool = False, node_budget: int | None = None) -> list[BoundReport]:
    rows = []
    for family, param, methods in PAPER_ROWS + (PAPER_ROWS_FULL if full else []):
        rows += report(family, param, methods, node_budget)
    # Theorem 6.2's scheme on the recursive submatrix, next to the closed form
    rows.append(_brec_scheme_row(2, node_budget))
    if full:
        rows.append(_brec_scheme_row(3, node_budget))
    return rows


def _brec_scheme_row(h: int, node_budget: int | None) -> BoundReport:
    start = time.perf_counter()
    budget = default_budget() if node_budget is None else node_budget
    built = build_brec(h, node_budget=budget)
    ms = round((time.perf_counter() - start) * 1000)
    status = "verified" if built.accepted else ("fallback" if built.fallback is not None
                                                and built.fallback.final else "interval")
    return BoundReport("brec", h, _matrix_id("brec", h, "recursive"), "certificate",
                       built.value, math.ceil(built.value), status, ms,
                       "; ".join(built.notes) or f"scheme value {built.declared}")


# -- rendering ---------------------------------------------------------------

CSV_COLUMNS = ("family", "param", "method", "value_exact", "value_decimal", "integral_bound",
               "status", "ms")


def decimal_str(value: Fraction, digits: int = 10) -> str:
    """Display-only decimal rendering with ``digits`` places."""
    with localcontext() as ctx:
        ctx.prec = digits + 40
        d = Decimal(value.numerator) / Decimal(value.denominator)
        return f"{d:.{digits}f}"


def _row(rep: BoundReport) -> list:
    return [rep.family, rep.param, rep.method,
            "" if rep.value is None else rational_str(rep.value),
            "" if rep.value is None else decimal_str(rep.value),
            "" if rep.integral is None else rep.integral, rep.status, rep.ms]


def emit(reports: list[BoundReport], fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rep in reports:
            w.writerow(_row(rep))
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([rep.to_json() for rep in reports], indent=1) + "\n"
    if fmt == "text":
        table = [list(CSV_COLUMNS)] + [[str(x) for x in _row(rep)] for rep in reports]
        widths = [max(len(line[k]) for line in table) for k in range(len(CSV_COLUMNS))]
        return "".join("  ".join(x.ljust(wd) for x, wd in zip(line, widths)).rstrip() + "\n"
                       for line in table)
    raise ValueError(f"unknown format {fmt!r}")
