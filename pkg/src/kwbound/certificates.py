"""Clique/rank constraint specs, dual certificates and their exact verification.

A dual certificate assigns a weight to every cell and a nonpositive
multiplier to every clique or rank group.  It proves a lower bound equal to
its objective once every monochromatic rectangle ``r`` satisfies

    sum of weights in r + sum of multipliers of groups containing r <= 1.

Groups are given by generator pairs of cells; a rectangle belongs to a group
when it contains both cells of one of its pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .commmatrix import CommMatrix
from .lp import parse_rational, rational_str
from .rects import (OracleResult, PenaltyGroup, Rect, RectLinearForm, colors_of,
                    max_linear_form, rect_closure_check, rects_intersect)
from .search import max_independent_set


@dataclass
class CliqueSpec:
    pairs: tuple[tuple[int, int], ...]
    z: Fraction = Fraction(0)
    label: str = ""

    def group(self) -> PenaltyGroup:
        return PenaltyGroup(tuple(self.pairs), Fraction(self.z), self.label)

    def to_json(self) -> dict:
        return {"pairs": [list(p) for p in self.pairs], "z": rational_str(self.z)}


@dataclass
class RankSpec:
    pairs: tuple[tuple[int, int], ...]
    alpha: int
    witness: tuple[int, ...]
    z: Fraction = Fraction(0)
    label: str = ""

    def group(self) -> PenaltyGroup:
        return PenaltyGroup(tuple(self.pairs), Fraction(self.z), self.label)

    def to_json(self) -> dict:
        return {"pairs": [list(p) for p in self.pairs], "alpha": self.alpha,
                "witness": list(self.witness), "z": rational_str(self.z)}


def _pair_problems(m: CommMatrix, pairs, what: str) -> tuple[list[str], list[Rect]]:
    problems, spans = [], []
    singles = {}
    for a, b in pairs:
        for s in (a, b):
            if s not in singles:
                cell = m.cell_by_serial(s)
                singles[s] = cell[0] if len(cell) == 1 else None
        if a == b:
            problems.append(f"{what}: pair ({a}, {b}) repeats a cell")
        if singles[a] is None or singles[b] is None:
            problems.append(f"{what}: pair ({a}, {b}) is not made of singleton cells")
        elif singles[a] != singles[b]:
            problems.append(f"{what}: pair ({a}, {b}) mixes indices {singles[a]} and {singles[b]}")
        span = rect_closure_check(m, (a, b))
        if span is None:
            problems.append(f"{what}: pair ({a}, {b}) spans a non-monochromatic rectangle")
        else:
            spans.append(span)
    return problems, spans


def validate_clique(m: CommMatrix, q: CliqueSpec) -> list[str]:
    """Problems with a clique spec; empty when every two members must intersect."""
    what = f"clique {q.label or list(q.pairs)}"
    problems, spans = _pair_problems(m, q.pairs, what)
    if q.z > 0:
        problems.append(f"{what}: multiplier {q.z} is positive")
    if not q.pairs:
        problems.append(f"{what}: no generator pairs")
    for s1, s2 in combinations(spans, 2):
        if not rects_intersect(s1, s2):
            problems.append(f"{what}: generator spans {s1.rows}x{s1.cols} and "
                            f"{s2.rows}x{s2.cols} share no row and column")
    return problems


@dataclass
class RankCheck:
    problems: list[str]
    matching_bound: int
    sample_alpha: int  # stability number among the spanned rectangles (a lower bound)


def check_rank(m: CommMatrix, g: RankSpec) -> RankCheck:
    what = f"rank group {g.label or ''}".strip()
    problems, spans = _pair_problems(m, g.pairs, what)
    if g.z > 0:
        problems.append(f"{what}: multiplier {g.z} is positive")
    witness = set(g.witness)
    for (a, b), span in zip(g.pairs, spans):
        inside = sum(1 for r, c in span.cells() if m.serial(r, c) in witness)
        if inside < 2:
            problems.append(f"{what}: pair ({a}, {b}) spans only {inside} witness cell(s)")
    # disjoint members use disjoint witness cells, at least two each
    bound = len(witness) // 2
    if g.alpha < bound:
        problems.append(f"{what}: claimed alpha {g.alpha} is below the provable bound {bound}")
    edges = [(i, j) for i, j in combinations(range(len(spans)), 2)
             if rects_intersect(spans[i], spans[j])]
    sample = max_independent_set(len(spans), edges)[0] if spans else 0
    return RankCheck(problems, bound, sample)


@dataclass
class DualCertificate:
    matrix: CommMatrix
    weights: dict[int, Fraction] = field(default_factory=dict)  # serial -> weight
    cliques: list[CliqueSpec] = field(default_factory=list)
    ranks: list[RankSpec] = field(default_factory=list)
    objective: Fraction = Fraction(0)  # declared
    label: str = ""

    def computed_objective(self) -> Fraction:
        return (sum(self.weights.values(), Fraction(0))
                + sum((q.z for q in self.cliques), Fraction(0))
                + sum((g.alpha * g.z for g in self.ranks), Fraction(0)))

    def form(self) -> RectLinearForm:
        groups = [q.group() for q in self.cliques] + [g.group() for g in self.ranks]
        return RectLinearForm({s: Fraction(v) for s, v in self.weights.items() if v}, groups)

    def to_json(self, inline_matrix: bool = True) -> dict:
        return {
            "matrix": self.matrix.to_json() if inline_matrix else self.matrix.provenance,
            "weights": [{"cell": s, "value": rational_str(v)}
                        for s, v in sorted(self.weights.items()) if v],
            "cliques": [q.to_json() for q in self.cliques],
            "ranks": [g.to_json() for g in self.ranks],
            "objective": rational_str(self.objective),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, doc: dict, matrix: CommMatrix | None = None) -> "DualCertificate":
        if matrix is None:
            if not isinstance(doc["matrix"], dict):
                raise ValueError("certificate names its matrix; pass it explicitly")
            matrix = CommMatrix.from_json(doc["matrix"])
        weights = {int(e["cell"]): parse_rational(e["value"]) for e in doc["weights"]}
        cliques = [CliqueSpec(tuple(tuple(p) for p in q["pairs"]), parse_rational(q["z"]))
                   for q in doc.get("cliques", [])]
        ranks = [RankSpec(tuple(tuple(p) for p in g["pairs"]), int(g["alpha"]),
                          tuple(g["witness"]), parse_rational(g["z"]))
                 for g in doc.get("ranks", [])]
        return cls(matrix, weights, cliques, ranks, parse_rational(doc["objective"]))


@dataclass
class Verification:
    feasible: bool | None  # None: the oracle ran out of budget
    objective: Fraction
    violations: list[tuple[Rect, Fraction]] = field(default_factory=list)
    problems: list[str] = field(default_factory=list)
    declared_matches: bool = True
    rank_checks: list[RankCheck] = field(default_factory=list)
    oracle: dict[int, OracleResult] = field(default_factory=dict)

    def summary(self) -> str:
        if self.feasible is None:
            state = "undecided"
        else:
            state = "feasible" if self.feasible else "infeasible"
        return f"{state}, objective {rational_str(self.objective)}"


def verify_certificate(m: CommMatrix, cert: DualCertificate,
                       node_budget: int = 5_000_000) -> Verification:
    """Validate groups, then confirm with the exact oracle that no rectangle exceeds 1."""
    n_cells = m.n_cells
    problems = []
    for s in cert.weights:
        if not 1 <= s <= n_cells:
            problems.append(f"weight on unknown cell {s}")
    for q in cert.cliques:
        problems += validate_clique(m, q)
    rank_checks = [check_rank(m, g) for g in cert.ranks]
    for rc in rank_checks:
        problems += rc.problems
    objective = cert.computed_objective()
    result = Verification(False, objective, problems=problems,
                          declared_matches=objective == cert.objective, rank_checks=rank_checks)
    if problems:
        return result
    form = cert.form()
    feasible: bool | None = True
    for color in colors_of(m):
        res = max_linear_form(m, form, color, floor=Fraction(1), node_budget=node_budget)
        result.oracle[color] = res
        if res.rect is not None and res.value > 1:
            result.violations.append((res.rect, res.value))
            feasible = False
        elif not res.complete and feasible:
            feasible = None
    result.feasible = feasible
    return result
