"""Dual certificates for the majority families, built from tangency weight schemes.

Every builder returns a plain :class:`DualCertificate`; the ``build_*``
variants also report whether the scheme verified and, when it did not, the
solved optimum of the strengthened LP with the same clique/rank families.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb

from .bounds import CoverLPResult, strengthened_bound
from .certificates import (CliqueSpec, DualCertificate, RankSpec, Verification,
                           verify_certificate)
from .commmatrix import (CommMatrix, brec2_submatrix, brec_submatrix, fig1_matrix,
                         index_set, maj_matrix, singleton_cells, urec_submatrix)


@dataclass(frozen=True)
class TangencyScheme:
    """Weights a on singletons and b elsewhere, tangent to k*a + (k^2-k)*b <= 1 at kstar."""

    kstar: Fraction

    @property
    def a(self) -> Fraction:
        return (2 * self.kstar - 1) / self.kstar ** 2

    @property
    def b(self) -> Fraction:
        return -1 / self.kstar ** 2

    @property
    def c(self) -> Fraction:
        return 2 * self.b

    def value(self, k) -> Fraction:
        return k * self.a + (k * k - k) * self.b

    def holds_up_to(self, kmax: int) -> bool:
        return all(self.value(k) <= 1 for k in range(1, kmax + 1))


def maj_epsilon(l: int) -> Fraction:
    return Fraction(l * l * (l + 1), 6 * comb(2 * l + 1, l))


def maj_bound(l: int) -> Fraction:
    return Fraction((l + 1) ** 2) / (1 - maj_epsilon(l))


def urec_bound(h: int) -> Fraction:
    return 4 * h + Fraction(8, 9) / 2 ** h


def brec_bound(h: int) -> Fraction:
    return 4 ** h + Fraction(13, 36) * Fraction(8, 3) ** h


def maj_scheme(l: int) -> TangencyScheme:
    m = comb(2 * l + 1, l)
    return TangencyScheme(Fraction(m, l + 1) - Fraction(l * l, 6))


def urec_scheme(h: int) -> TangencyScheme:
    return TangencyScheme(Fraction(3 * 2 ** h, 4))


def brec_scheme(h: int) -> TangencyScheme:
    return TangencyScheme(Fraction(3, 2) ** h)


def block_clique(m: CommMatrix, rows, cols, z: Fraction = Fraction(0),
                 label: str = "") -> CliqueSpec:
    """Clique generated by the same-index singleton pairs inside a block."""
    sing = dict(singleton_cells(m))
    by_index = defaultdict(list)
    for r in rows:
        for c in cols:
            s = m.serial(r, c)
            if s in sing:
                by_index[sing[s]].append(s)
    pairs = []
    for idx in sorted(by_index):
        pairs += list(combinations(by_index[idx], 2))
    return CliqueSpec(tuple(pairs), z, label)


def cert_maj3() -> DualCertificate:
    m = fig1_matrix("general")
    sing = singleton_cells(m)
    weights = {s: Fraction(1) for s, _ in sing}
    clique = block_clique(m, range(3), range(3), Fraction(-1), "fig1")
    return DualCertificate(m, weights, [clique], [], Fraction(5), label="MAJ3")


def maj_submatrices(l: int, m: CommMatrix) -> list[tuple[list[int], list[int]]]:
    """The 3x3 blocks obtained by fixing 2l-2 balanced bits, as row/col index lists."""
    n = 2 * l + 1
    row_at = {x: i for i, x in enumerate(m.rows)}
    col_at = {y: j for j, y in enumerate(m.cols)}
    blocks = []
    for triple in combinations(range(n), 3):
        others = [i for i in range(n) if i not in triple]
        for ones in combinations(others, l - 1):
            base = sum(1 << i for i in ones)
            t = [1 << i for i in triple]
            rows = [row_at[base + t[0] + t[1]], row_at[base + t[0] + t[2]],
                    row_at[base + t[1] + t[2]]]
            cols = [col_at[base + t[0]], col_at[base + t[1]], col_at[base + t[2]]]
            blocks.append((rows, cols))
    return blocks


def cert_maj(l: int) -> DualCertificate:
    if not 2 <= l <= 3:
        raise ValueError("cert_maj supports 2 <= l <= 3")
    m = maj_matrix(l, "general")
    scheme = maj_scheme(l)
    weights = {}
    rows, cols = m.shape
    for r in range(rows):
        for c in range(cols):
            k = len(index_set(int(m.cells[r, c])))
            weights[m.serial(r, c)] = scheme.a if k == 1 else Fraction(0) if k == 3 else scheme.b
    cliques = [block_clique(m, rr, cc, scheme.c, f"T{i}")
               for i, (rr, cc) in enumerate(maj_submatrices(l, m))]
    return DualCertificate(m, weights, cliques, [], maj_bound(l), label=f"MAJ{2 * l + 1}")


# Cliques and the rank group of the 9x9 BRecMAJ_3^2 submatrix, by figure serial.
BREC2_CLIQUES = (
    ((5, 15), (4, 24), (13, 23)), ((35, 45), (34, 54), (43, 53)),
    ((2, 12), (1, 21), (10, 20)), ((62, 72), (61, 81), (70, 80)),
    ((29, 39), (28, 48), (37, 47)), ((59, 69), (58, 78), (67, 77)),
    ((5, 35), (2, 62), (29, 59)), ((15, 45), (12, 72), (39, 69)),
    ((4, 34), (1, 61), (28, 58)), ((24, 54), (21, 81), (48, 78)),
    ((13, 43), (10, 70), (37, 67)), ((23, 53), (20, 80), (47, 77)),
)
BREC2_RANK_PAIRS = (
    (5, 45), (15, 35), (4, 54), (24, 34), (13, 53), (23, 43),
    (2, 72), (12, 62), (1, 81), (21, 61), (10, 80), (20, 70),
    (29, 69), (39, 59), (28, 78), (48, 58), (37, 77), (47, 67),
)
BREC2_WITNESS = (9, 17, 25, 33, 41, 49, 57, 65, 73)
BREC2_ALPHA = 4


def _brec2_groups(m: CommMatrix, rows, cols, z: Fraction, tag: str = ""):
    """The figure's 12 cliques and rank group, mapped onto a 9x9 block of ``m``."""
    def glob(s: int) -> int:
        r, c = divmod(s - 1, 9)
        return m.serial(rows[r], cols[c])

    cliques = [CliqueSpec(tuple((glob(a), glob(b)) for a, b in q), z, f"{tag}q{i + 1}")
               for i, q in enumerate(BREC2_CLIQUES)]
    rank = RankSpec(tuple((glob(a), glob(b)) for a, b in BREC2_RANK_PAIRS), BREC2_ALPHA,
                    tuple(glob(s) for s in BREC2_WITNESS), z, f"{tag}g")
    return cliques, rank


def cert_brec2() -> DualCertificate:
    m, _ = brec2_submatrix()
    weights = {s: Fraction(1) for s, _ in singleton_cells(m)}
    cliques, rank = _brec2_groups(m, list(range(9)), list(range(9)), Fraction(-1))
    return DualCertificate(m, weights, cliques, [rank], Fraction(20), label="BRecMAJ3^2")


@dataclass
class BuiltBound:
    """A scheme certificate together with its verification and, if needed, the solver result."""

    scheme: DualCertificate
    declared: Fraction
    verification: Verification
    fallback: CoverLPResult | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        v = self.verification
        return bool(v.feasible) and v.objective == self.declared

    @property
    def certificate(self) -> DualCertificate:
        if self.accepted or self.fallback is None:
            return self.scheme
        return self.fallback.certificate

    @property
    def value(self) -> Fraction:
        """Best proven lower bound on the submatrix (scheme or solver)."""
        best = self.verification.objective if self.verification.feasible else Fraction(0)
        if self.fallback is not None:
            best = max(best, self.fallback.lower)
        return best


def _finish(m, cert: DualCertificate, declared: Fraction, notes, node_budget,
            fallback: bool) -> BuiltBound:
    v = verify_certificate(m, cert, node_budget=node_budget)
    built = BuiltBound(cert, declared, v, notes=notes)
    if built.accepted:
        return built
    if v.problems:
        notes.append("scheme rejected: " + "; ".join(v.problems[:3]))
    elif v.feasible is False:
        rect, val = v.violations[0]
        notes.append(f"scheme infeasible: rectangle rows {list(rect.rows)} x cols "
                     f"{list(rect.cols)} (color {rect.color}) has value {val}")
    elif v.feasible is None:
        notes.append("scheme verification ran out of oracle budget")
    else:
        notes.append(f"scheme feasible but its objective {v.objective} differs from {declared}")
    if fallback:
        groups = [CliqueSpec(q.pairs, Fraction(0), q.label) for q in cert.cliques]
        ranks = [RankSpec(g.pairs, g.alpha, g.witness, Fraction(0), g.label) for g in cert.ranks]
        built.fallback = strengthened_bound(m, groups, ranks, node_budget=node_budget)
        state = "optimum" if built.fallback.final else "certified lower bound"
        notes.append(f"solver fallback: {state} {built.fallback.lower}")
    return built


def build_urec(h: int, mode: str = "general", node_budget: int = 5_000_000,
               fallback: bool = True) -> BuiltBound:
    if not 2 <= h <= 3:
        raise ValueError("cert_urec supports 2 <= h <= 3")
    m, spec = urec_submatrix(h, mode)
    scheme = urec_scheme(h)
    notes = []
    all_rows, all_cols = spec.blocks["ALL-S1"]
    s1 = spec.blocks["S1"]
    in_s1 = {(r, c) for rr, cc in s1 for r in rr for c in cc}
    sing = dict(singleton_cells(m))
    weights: dict[int, Fraction] = {}
    for r in all_rows:
        for c in all_cols:
            s = m.serial(r, c)
            if sing.get(s) in (1, 2, 3):
                weights[s] = scheme.a
            elif (r, c) not in in_s1:
                weights[s] = scheme.b
    cliques = [block_clique(m, rr, cc, scheme.c, f"S1#{i}") for i, (rr, cc) in enumerate(s1)]
    # X'/Y' cells of each higher level
    size = 3 * 2 ** (h - 2)
    share = Fraction(1, size)
    rows_all, cols_all = set(all_rows), set(all_cols)
    for lv in range(2, h + 1):
        spanned_rows, spanned_cols = set(), set()
        for idx in (2 * lv, 2 * lv + 1):
            cells = sorted(m.locate(s) for s, i in sing.items() if i == idx)
            vertical = [(r, c) for r, c in cells if r in rows_all][:size]
            horizontal = [(r, c) for r, c in cells if c in cols_all][:size]
            spanned_rows |= {r for r, _ in vertical}
            spanned_cols |= {c for _, c in horizontal}
            for r, c in vertical + horizontal:
                weights[m.serial(r, c)] = share
        if not (spanned_rows >= rows_all and spanned_cols >= cols_all):
            notes.append(f"level {lv}: singleton cells of indices {2 * lv},{2 * lv + 1} span "
                         f"{len(spanned_rows & rows_all)}/{len(rows_all)} rows and "
                         f"{len(spanned_cols & cols_all)}/{len(cols_all)} cols of ALL-S1")
    cert = DualCertificate(m, weights, cliques, [], urec_bound(h), label=f"URecMAJ3^{h}")
    return _finish(m, cert, urec_bound(h), notes, node_budget, fallback)


def cert_urec(h: int, **kw) -> DualCertificate:
    return build_urec(h, **kw).certificate


def build_brec(h: int, node_budget: int = 5_000_000, fallback: bool = True) -> BuiltBound:
    if not 2 <= h <= 3:
        raise ValueError("cert_brec supports 2 <= h <= 3")
    m, spec = brec_submatrix(h)
    scheme = brec_scheme(h)
    copies = spec.blocks["S2"]
    in_s2 = {(r, c) for rr, cc in copies for r in rr for c in cc}
    sing = dict(singleton_cells(m))
    rows, cols = m.shape
    weights = {}
    for r in range(rows):
        for c in range(cols):
            s = m.serial(r, c)
            if s in sing:
                weights[s] = scheme.a
            elif (r, c) not in in_s2:
                weights[s] = scheme.b
    cliques, ranks = [], []
    for i, (rr, cc) in enumerate(copies):
        qs, g = _brec2_groups(m, rr, cc, scheme.c, f"S2#{i}.")
        cliques += qs
        ranks.append(g)
    cert = DualCertificate(m, weights, cliques, ranks, brec_bound(h), label=f"BRecMAJ3^{h}")
    return _finish(m, cert, brec_bound(h), [], node_budget, fallback)


def cert_brec(h: int, **kw) -> DualCertificate:
    return build_brec(h, **kw).certificate
