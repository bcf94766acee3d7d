"""LP lower bounds on the rectangle partition number by column generation.

The primal cover LP has one equality row per cell and one ``<=`` row per
clique or rank group; its columns are monochromatic rectangles, held
implicitly.  We start from the 1x1 rectangles (plus one slack per group),
which form an identity basis, and repeatedly price new rectangles with the
exact oracle: the simplex duals are the cell weights and group multipliers
of the dual problem, and a rectangle whose dual value exceeds 1 has negative
reduced cost.  When no such rectangle exists the restricted optimum is the
optimum over all rectangles.

If an oracle call runs out of budget we still return a proven interval: the
current duals scaled down by the largest certified upper bound form a
feasible dual solution.

Exact pivoting gets slow beyond a hundred or so cells, so by default a
floating-point pass (HiGHS, warm-started between rounds) runs the same column generation
first, with duals rounded to dyadic rationals for pricing.  Its optimal
support only seeds the exact tableau; the exact loop then runs to
completion as usual, so the reported values never depend on floats.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import highspy
import numpy as np

from .certificates import (CliqueSpec, DualCertificate, RankSpec, check_rank,
                           validate_clique)
from .commmatrix import CommMatrix
from .lp import Tableau, to_fraction
from .rects import (PenaltyGroup, Rect, RectLinearForm, colors_of, group_contains,
                    max_linear_form)

DEFAULT_NODE_BUDGET = 5_000_000


class InvalidGroupSpec(ValueError):
    pass


@dataclass
class CoverLPResult:
    lower: Fraction  # proven lower bound on the LP optimum
    upper: Fraction  # value of the last restricted problem, an upper bound
    final: bool  # lower == upper and the optimum is certified
    certificate: DualCertificate  # dual solution achieving ``lower``
    columns: list[tuple[Rect, Fraction]] = field(default_factory=list)  # primal support
    rounds: int = 0
    pivots: int = 0
    seconds: float = 0.0

    @property
    def value(self) -> Fraction:
        if not self.final:
            raise ValueError(f"LP not solved to optimality: [{self.lower}, {self.upper}]")
        return self.lower


def _check_groups(m: CommMatrix, cliques, ranks) -> None:
    problems = []
    for q in cliques:
        problems += validate_clique(m, q)
    for g in ranks:
        problems += check_rank(m, g).problems
    if problems:
        raise InvalidGroupSpec("; ".join(problems))


def cover_lp(m: CommMatrix, cliques: list[CliqueSpec] = (), ranks: list[RankSpec] = (),
             node_budget: int = DEFAULT_NODE_BUDGET, max_rounds: int = 100_000,
             extra_columns: list[Rect] = (), rule: str = "dantzig",
             seed: bool = True, time_budget: float | None = None) -> CoverLPResult:
    """Solve the (clique/rank strengthened) cover LP over all monochromatic rectangles.

    With ``time_budget`` (seconds) the search stops once the budget is spent
    and the result is the proven interval reached so far.
    """
    start = time.perf_counter()
    deadline = None if time_budget is None else start + time_budget
    cliques, ranks = list(cliques), list(ranks)
    _check_groups(m, cliques, ranks)
    rows, cols = m.shape
    n = rows * cols
    groups = [PenaltyGroup(q.pairs, Fraction(0), q.label) for q in cliques]
    groups += [PenaltyGroup(g.pairs, Fraction(0), g.label) for g in ranks]
    rhs = [1] * n + [1] * len(cliques) + [g.alpha for g in ranks]
    colors = colors_of(m)

    columns, costs, rects = [], [], []
    for r in range(rows):
        for c in range(cols):
            columns.append({r * cols + c: 1})
            costs.append(1)
            rects.append(Rect.of(m.cell(r, c)[0], [r], [c]))
    for k in range(len(groups)):
        columns.append({n + k: 1})
        costs.append(0)
        rects.append(None)
    units = list(range(n + len(groups)))
    tab = Tableau(columns, costs, rhs, basis=units, rule=rule)

    def add_rects(new_rects: list[Rect]) -> None:
        entries = []
        for rect in new_rects:
            col = {r * cols + c: 1 for r, c in rect.cells()}
            for k, g in enumerate(groups):
                if group_contains(m, g, rect):
                    col[n + k] = 1
            entries.append((col, 1))
            columns.append(col)
            costs.append(1)
        tab.add_columns(entries)
        rects.extend(new_rects)

    add_rects(list(extra_columns))
    if seed:
        seeded, basic_units = _float_seed(m, groups, rhs, colors, node_budget, deadline)
        first = len(rects)
        add_rects(seeded)
        # start from the float optimal basis when it is exactly feasible
        if not tab.crash(basic_units + list(range(first, len(rects)))):
            tab = Tableau(columns, costs, rhs, basis=units, rule=rule)

    best_lower, best_cert = Fraction(0), None
    rounds = 0
    while True:
        rounds += 1
        # past the deadline the current basis is still primal feasible, so its
        # value bounds from above and its scaled duals bound from below
        optimized = not _past(deadline)
        if optimized:
            tab.optimize()
        y = [to_fraction(v) for v in tab.duals()]
        upper = to_fraction(tab.value)
        weights = {s + 1: y[s] for s in range(n) if y[s]}
        zs = [min(v, Fraction(0)) for v in y[n:]]
        form = RectLinearForm(weights, [PenaltyGroup(g.pairs, z, g.label)
                                        for g, z in zip(groups, zs)])
        worst = Fraction(1)
        complete = True
        new = []
        for color in colors:
            res = max_linear_form(m, form, color, floor=Fraction(1), node_budget=node_budget)
            complete &= res.complete
            worst = max(worst, res.upper)
            if res.rect is not None and res.value > 1:
                new.append(res.rect)
        # y / worst is dual feasible
        cert = _certificate(m, weights, cliques, ranks, zs, worst)
        lower = cert.objective
        if optimized and lower != upper / worst:
            raise AssertionError("dual objective does not match the restricted LP value")
        if lower >= best_lower:
            best_lower, best_cert = lower, cert
        if not new or rounds >= max_rounds or _past(deadline):
            break
        add_rects(new)

    final = complete and not new and best_lower == upper
    x = tab.primal()
    support = [(rects[j], to_fraction(x[j])) for j in range(len(rects))
               if x[j] and rects[j] is not None]
    return CoverLPResult(best_lower, upper, final, best_cert, support, rounds, tab.pivots,
                         time.perf_counter() - start)


SEED_SCALE = 2 ** 24
SEED_PER_COLOR = 8


def _float_seed(m: CommMatrix, groups: list[PenaltyGroup], rhs: list[int], colors,
                node_budget: int, deadline: float | None = None,
                max_rounds: int = 10_000) -> tuple[list[Rect], list[int]]:
    """Column generation with a floating-point master; returns the generated columns.

    The master stays loaded in HiGHS and is re-solved from the previous basis
    after each batch of columns.  Returns the generated columns basic at the
    end, and the indices of the basic unit columns (1x1 rectangles by cell,
    then group slacks).  Pricing uses the exact oracle on duals
    rounded to multiples of 1/SEED_SCALE, so every returned rectangle is
    genuinely monochromatic.  Nothing here is trusted beyond being a good
    starting column set.
    """
    rows, cols = m.shape
    n = rows * cols
    k = len(groups)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    # new columns keep the basis primal feasible, so re-solve with primal simplex
    h.setOptionValue("simplex_strategy", 4)
    inf = highspy.kHighsInf
    lower = np.array([1.0] * n + [-inf] * k)
    upper = np.array([1.0] * n + [float(v) for v in rhs[n:]])
    h.addRows(n + k, lower, upper, 0, np.zeros(n + k, dtype=np.int32),
              np.zeros(0, dtype=np.int32), np.zeros(0))

    def add(rect: Rect) -> None:
        idx = [r * cols + c for r, c in rect.cells()]
        idx += [n + g for g, grp in enumerate(groups) if group_contains(m, grp, rect)]
        h.addCol(1.0, 0.0, inf, len(idx), np.array(idx, dtype=np.int32), np.ones(len(idx)))

    seen = set()
    for r in range(rows):
        for c in range(cols):
            rect = Rect.of(m.cell(r, c)[0], [r], [c])
            seen.add((rect.color, rect.rowset, rect.colset))
            add(rect)
    found_rects: list[Rect] = []
    floor = Fraction(SEED_SCALE + 16, SEED_SCALE)
    for _ in range(max_rounds):
        h.run()
        if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
            break
        duals = h.getSolution().row_dual
        weights = {s + 1: Fraction(round(duals[s] * SEED_SCALE), SEED_SCALE)
                   for s in range(n) if round(duals[s] * SEED_SCALE)}
        form = RectLinearForm(weights, [
            PenaltyGroup(g.pairs, Fraction(min(0, round(duals[n + i] * SEED_SCALE)),
                                           SEED_SCALE), g.label)
            for i, g in enumerate(groups)])
        added = 0
        for color in colors:
            # after each find, zero the positive weights it used and search again;
            # the reduced form is pointwise smaller, so hits still price out
            reduced = RectLinearForm(dict(weights), form.groups)
            for _ in range(SEED_PER_COLOR):
                rect = max_linear_form(m, reduced, color, floor=floor,
                                       node_budget=node_budget).rect
                if rect is None or (rect.color, rect.rowset, rect.colset) in seen:
                    break
                seen.add((rect.color, rect.rowset, rect.colset))
                found_rects.append(rect)
                add(rect)
                added += 1
                for r, c in rect.cells():
                    s = r * cols + c + 1
                    if reduced.weights.get(s, 0) > 0:
                        del reduced.weights[s]
        if not added or _past(deadline):
            break
    # only the final basis matters; the exact loop regenerates anything else it needs
    basis = h.getBasis()
    basic = highspy.HighsBasisStatus.kBasic
    # a basic logical of a cell row maps to that cell's 1x1 column, like a slack
    units = sorted({j for j in range(n) if basis.col_status[j] == basic}
                   | {i for i in range(n + k) if basis.row_status[i] == basic})
    return [rect for j, rect in enumerate(found_rects)
            if basis.col_status[n + j] == basic], units


def _past(deadline: float | None) -> bool:
    return deadline is not None and time.perf_counter() > deadline


def _certificate(m, weights, cliques, ranks, zs, scale) -> DualCertificate:
    k = len(cliques)
    cq = [CliqueSpec(q.pairs, zs[i] / scale, q.label) for i, q in enumerate(cliques)]
    rk = [RankSpec(g.pairs, g.alpha, g.witness, zs[k + i] / scale, g.label)
          for i, g in enumerate(ranks)]
    w = {s: v / scale for s, v in weights.items()}
    cert = DualCertificate(m, w, cq, rk, Fraction(0), label="solver")
    cert.objective = cert.computed_objective()
    return cert


def lp_bound(m: CommMatrix, node_budget: int = DEFAULT_NODE_BUDGET,
             time_budget: float | None = None) -> CoverLPResult:
    return cover_lp(m, node_budget=node_budget, time_budget=time_budget)


def strengthened_bound(m: CommMatrix, cliques: list[CliqueSpec] = (),
                       ranks: list[RankSpec] = (),
                       node_budget: int = DEFAULT_NODE_BUDGET,
                       time_budget: float | None = None) -> CoverLPResult:
    return cover_lp(m, cliques, ranks, node_budget=node_budget, time_budget=time_budget)


def integral_bound(value: Fraction) -> int:
    return math.ceil(value)
