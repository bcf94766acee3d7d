"""Monochromatic rectangles and the exact maximum-weight rectangle oracle.

The LP works over every monochromatic rectangle of a matrix, a family far too
large to list.  Everything global goes through :func:`max_linear_form`, which
finds a rectangle of one color maximizing a cell-weight sum plus group
penalties, by branch and bound over row subsets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .boxsearch import box_search
from .commmatrix import CommMatrix


def _bits(mask: int) -> tuple[int, ...]:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return tuple(out)


def _mask(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


@dataclass(frozen=True)
class Rect:
    """Row set x col set (bit masks over 0-based matrix indices) with a color."""

    color: int
    rowset: int
    colset: int

    def __post_init__(self):
        if self.rowset <= 0 or self.colset <= 0:
            raise ValueError("rectangles need nonempty row and column sets")

    @classmethod
    def of(cls, color: int, rows: Iterable[int], cols: Iterable[int]) -> "Rect":
        return cls(color, _mask(rows), _mask(cols))

    @property
    def rows(self) -> tuple[int, ...]:
        return _bits(self.rowset)

    @property
    def cols(self) -> tuple[int, ...]:
        return _bits(self.colset)

    @property
    def size(self) -> int:
        return self.rowset.bit_count() * self.colset.bit_count()

    def contains(self, r: int, c: int) -> bool:
        return bool((self.rowset >> r) & 1 and (self.colset >> c) & 1)

    def cells(self) -> Iterator[tuple[int, int]]:
        for r in self.rows:
            for c in self.cols:
                yield r, c

    def sort_key(self):
        return (self.color, self.rows, self.cols)

    def to_json(self) -> dict:
        return {"color": self.color, "rows": list(self.rows), "cols": list(self.cols)}

    @classmethod
    def from_json(cls, doc: dict) -> "Rect":
        return cls.of(int(doc["color"]), doc["rows"], doc["cols"])


def is_monochromatic(m: CommMatrix, rect: Rect) -> bool:
    if rect.rowset >> len(m.rows) or rect.colset >> len(m.cols):
        raise ValueError("rectangle outside matrix bounds")
    bit = np.uint64(1 << (rect.color - 1))
    block = m.cells[np.ix_(rect.rows, rect.cols)]
    return bool(np.all(block & bit))


def common_colors(m: CommMatrix, rows: Sequence[int], cols: Sequence[int]) -> tuple[int, ...]:
    block = m.cells[np.ix_(list(rows), list(cols))]
    common = int(np.bitwise_and.reduce(block.reshape(-1)))
    return tuple(k + 1 for k in range(common.bit_length()) if (common >> k) & 1)


def rect_closure_check(m: CommMatrix, serials: Iterable[int]) -> Rect | None:
    """Smallest rectangle spanning the given cells, colored by its least common index."""
    locs = [m.locate(s) for s in serials]
    if not locs:
        raise ValueError("need at least one cell")
    rows = sorted({r for r, _ in locs})
    cols = sorted({c for _, c in locs})
    colors = common_colors(m, rows, cols)
    return Rect.of(colors[0], rows, cols) if colors else None


def rects_intersect(r1: Rect, r2: Rect) -> bool:
    return bool(r1.rowset & r2.rowset and r1.colset & r2.colset)


def admissible(m: CommMatrix, color: int) -> np.ndarray:
    """Boolean (rows x cols) array of cells containing ``color``."""
    return (m.cells & np.uint64(1 << (color - 1))) != 0


def colors_of(m: CommMatrix) -> list[int]:
    present = int(np.bitwise_or.reduce(m.cells.reshape(-1))) if m.cells.size else 0
    return [k + 1 for k in range(present.bit_length()) if (present >> k) & 1]


class EnumerationCapExceeded(RuntimeError):
    pass


def _row_subsets(adm_masks: list[int]) -> Iterator[tuple[int, int]]:
    """(rowset, common admissible colset) for every row subset with a nonempty common set."""
    nrows = len(adm_masks)

    def rec(k: int, rowset: int, cand: int):
        for j in range(k, nrows):
            nc = cand & adm_masks[j]
            if nc:
                rs = rowset | (1 << j)
                yield rs, nc
                yield from rec(j + 1, rs, nc)

    full = ~0
    yield from rec(0, 0, full)


def count_mono_rects(m: CommMatrix) -> int:
    total = 0
    for color in colors_of(m):
        adm = admissible(m, color)
        masks = [_mask(np.nonzero(adm[r])[0].tolist()) for r in range(adm.shape[0])]
        for _, cand in _row_subsets(masks):
            total += (1 << cand.bit_count()) - 1
    return total


def enumerate_all_mono_rects(m: CommMatrix, cap: int = 10_000_000) -> list[Rect]:
    """Every monochromatic rectangle once, ordered by (color, rows, cols)."""
    total = count_mono_rects(m)
    if total > cap:
        raise EnumerationCapExceeded(f"{total} monochromatic rectangles exceed cap {cap}")
    out = []
    for color in colors_of(m):
        adm = admissible(m, color)
        masks = [_mask(np.nonzero(adm[r])[0].tolist()) for r in range(adm.shape[0])]
        for rowset, cand in _row_subsets(masks):
            cols = _bits(cand)
            for sub in range(1, 1 << len(cols)):
                colset = _mask(cols[k] for k in range(len(cols)) if (sub >> k) & 1)
                out.append(Rect(color, rowset, colset))
    out.sort(key=Rect.sort_key)
    return out


# -- linear forms over rectangles -------------------------------------------

@dataclass(frozen=True)
class PenaltyGroup:
    """A rectangle belongs to the group iff it contains both cells of some pair."""

    pairs: tuple[tuple[int, int], ...]  # serial numbers
    z: Fraction
    label: str = ""

    def __post_init__(self):
        if self.z > 0:
            raise ValueError("group multipliers must be <= 0")


@dataclass
class RectLinearForm:
    weights: dict[int, Fraction] = field(default_factory=dict)  # serial -> weight
    groups: list[PenaltyGroup] = field(default_factory=list)

    def weight_matrix(self, m: CommMatrix) -> list[list[Fraction]]:
        rows, cols = m.shape
        w = [[Fraction(0)] * cols for _ in range(rows)]
        for s, v in self.weights.items():
            r, c = m.locate(s)
            w[r][c] = Fraction(v)
        return w


def group_contains(m: CommMatrix, group: PenaltyGroup, rect: Rect) -> bool:
    for a, b in group.pairs:
        if rect.contains(*m.locate(a)) and rect.contains(*m.locate(b)):
            return True
    return False


def form_value(m: CommMatrix, form: RectLinearForm, rect: Rect) -> Fraction:
    total = Fraction(0)
    for s, v in form.weights.items():
        if rect.contains(*m.locate(s)):
            total += v
    for g in form.groups:
        if group_contains(m, g, rect):
            total += g.z
    return total


@dataclass
class OracleResult:
    rect: Rect | None  # None: nothing found above the floor
    value: Fraction | None
    upper: Fraction  # proven upper bound on the maximum
    complete: bool = True
    nodes: int = 0

    @property
    def exact(self) -> bool:
        return self.complete and self.rect is not None and self.value == self.upper


class _Scaled:
    """Integer-scaled copy of a form restricted to one color."""

    def __init__(self, m: CommMatrix, form: RectLinearForm, color: int):
        self.m = m
        vals = list(form.weights.values()) + [g.z for g in form.groups]
        self.scale = math.lcm(*(Fraction(v).denominator for v in vals)) if vals else 1
        rows, cols = m.shape
        w = [[0] * cols for _ in range(rows)]
        for s, v in form.weights.items():
            r, c = m.locate(s)
            w[r][c] = int(Fraction(v) * self.scale)
        big = max([abs(x) for line in w for x in line]
                  + [abs(int(g.z * self.scale)) for g in form.groups], default=0)
        dtype = np.int64 if big * (rows * cols + len(form.groups) + 1) < 2 ** 60 else object
        self.w = np.array(w, dtype=dtype).reshape(rows, cols)
        self.dtype = dtype
        self.adm = admissible(m, color)
        # pairs that can lie in a rectangle of this color
        self.pairs: list[tuple[int, int, int, int, int]] = []  # (ra, ca, rb, cb, group)
        self.z: list[int] = []
        for gi, g in enumerate(form.groups):
            self.z.append(int(g.z * self.scale))
            for a, b in g.pairs:
                (ra, ca), (rb, cb) = m.locate(a), m.locate(b)
                if (self.adm[ra, ca] and self.adm[rb, cb] and self.adm[ra, cb]
                        and self.adm[rb, ca]):
                    self.pairs.append((ra, ca, rb, cb, gi))


def _components(adm: np.ndarray) -> list[tuple[list[int], list[int]]]:
    rows, cols = adm.shape
    parent = list(range(rows + cols))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for r, c in zip(*np.nonzero(adm)):
        a, b = find(int(r)), find(rows + int(c))
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups: dict[int, tuple[list[int], list[int]]] = {}
    for r in range(rows):
        if adm[r].any():
            groups.setdefault(find(r), ([], []))[0].append(r)
    for c in range(cols):
        if adm[:, c].any():
            groups.setdefault(find(rows + c), ([], []))[1].append(c)
    return [groups[k] for k in sorted(groups)]


class OracleBudgetExceeded(RuntimeError):
    pass


def _best_colset(S, cand: list[int], colpairs: list[tuple[int, int, int]], z: list[int],
                 threshold=None):
    """Best nonempty column subset of ``cand`` given column sums and active pairs.

    ``colpairs`` holds (col_a, col_b, group) for pairs whose rows are all chosen.
    Returns (value, [cols]), or (None, []) when no subset beats ``threshold``.
    Only columns with positive sum are worth adding beyond a single column,
    since penalties only grow with the column set.
    """
    val_of = {c: int(S[c]) for c in cand}
    pos = [c for c in cand if val_of[c] > 0]
    # no subset can exceed the positive total, or the best single column without positives
    bound = sum(val_of[c] for c in pos) if pos else max(val_of.values())
    if threshold is not None and bound <= threshold:
        return None, []
    best_val, best_cols = None, []
    if pos:
        posset = set(pos)
        live = [(a, b, g) for a, b, g in colpairs if a in posset and b in posset]
        involved = sorted({a for a, _, _ in live} | {b for _, b, _ in live},
                          key=lambda c: (-val_of[c], c))
        rank = {c: k for k, c in enumerate(involved)}
        free = [c for c in pos if c not in rank]
        base = sum(val_of[c] for c in free)
        by_col: list[list[tuple[int, int]]] = [[] for _ in involved]
        touching: list[list[tuple[int, int]]] = [[] for _ in involved]
        for a, b, g in live:
            ka, kb = rank[a], rank[b]
            by_col[max(ka, kb)].append((min(ka, kb), g))
            touching[ka].append((kb, g))
            if kb != ka:
                touching[kb].append((ka, g))
        vals = [val_of[c] for c in involved]
        state = [threshold, None]  # value to beat, chosen mask
        last = len(involved)

        def bound(k: int, chosen: int, active: int) -> int:
            # each remaining column pays the groups it would surely activate;
            # a group is charged to at most one column, so this stays an upper bound
            total, charged = 0, active
            for j in range(k, last):
                v = vals[j]
                for other, g in touching[j]:
                    if not (charged >> g) & 1 and (other == j or (chosen >> other) & 1):
                        charged |= 1 << g
                        v += z[g]
                if v > 0:
                    total += v
            return total

        def rec(k: int, chosen: int, active: int, val: int):
            if state[0] is not None and val + bound(k, chosen, active) <= state[0]:
                return
            if k == last:
                if chosen or free:
                    state[0], state[1] = val, chosen
                return
            hit, pen = active, 0
            for other, g in by_col[k]:
                if (other == k or (chosen >> other) & 1) and not (hit >> g) & 1:
                    hit |= 1 << g
                    pen += z[g]
            rec(k + 1, chosen | (1 << k), hit, val + vals[k] + pen)
            rec(k + 1, chosen, active, val)

        rec(0, 0, 0, base)
        if state[1] is not None:
            best_val = state[0]
            best_cols = sorted(free + [involved[k] for k in range(last) if (state[1] >> k) & 1])
    if best_val is None or best_val < 0:
        # single column fallback (possibly non-positive)
        for c in cand:
            pen = {g for a, b, g in colpairs if a == c and b == c}
            v = val_of[c] + sum(z[g] for g in pen)
            if best_val is None or v > best_val:
                best_val, best_cols = v, [c]
    if threshold is not None and best_val <= threshold:
        return None, []
    return best_val, best_cols


def _search_component(sc: _Scaled, rows: list[int], cols: list[int], transpose: bool,
                      floor, incumbent, budget: list[int]):
    """Branch and bound over subsets of ``rows`` (or cols when transposed)."""
    w = sc.w[np.ix_(rows, cols)]
    adm = sc.adm[np.ix_(rows, cols)]
    if transpose:
        w, adm = w.T, adm.T
        rows, cols = cols, rows
    nb, nc = adm.shape
    w = np.where(adm, w, 0).astype(sc.dtype)
    pos = np.where(w > 0, w, 0).astype(sc.dtype)
    order = sorted(range(nb), key=lambda r: (-pos[r].sum(), r))
    w, adm, pos = w[order], adm[order], pos[order]
    branch_ids = [rows[r] for r in order]
    other_ids = cols
    suffix = np.zeros((nb + 1, nc), dtype=sc.dtype)
    for k in range(nb - 1, -1, -1):
        suffix[k] = suffix[k + 1] + pos[k]
    adm_masks = [_mask(np.nonzero(adm[r])[0].tolist()) for r in range(nb)]
    lb = {r: k for k, r in enumerate(branch_ids)}
    lo = {c: k for k, c in enumerate(other_ids)}
    # pairs in local coordinates: (branch_a, other_a, branch_b, other_b, group)
    pairs = []
    for ra, ca, rb, cb, g in sc.pairs:
        if transpose:
            ra, ca, rb, cb = ca, ra, cb, rb
        if ra in lb and rb in lb and ca in lo and cb in lo:
            pairs.append((lb[ra], lo[ca], lb[rb], lo[cb], g))

    best_val, best_rect = incumbent
    threshold = best_val if floor is None or (best_val is not None and best_val > floor) else floor
    zero = np.zeros(nc, dtype=sc.dtype)
    stack = [(0, 0, (1 << nc) - 1, zero)]
    nodes = 0
    while stack:
        k, incl, cand, S = stack.pop()
        nodes += 1
        budget[0] -= 1
        cand_idx = _bits(cand)
        total = S[list(cand_idx)] + suffix[k][list(cand_idx)]
        ub = total[total > 0].sum() if len(cand_idx) else 0
        if threshold is not None and ub <= threshold:
            continue
        if budget[0] < 0:
            pending = [ub] + [_node_ub(e, suffix, nb, w) for e in stack]
            raise OracleBudgetExceeded((best_val, best_rect, int(max(pending)), nodes))
        if k == nb:
            continue
        # exclude row k (pushed first so include is explored first)
        stack.append((k + 1, incl, cand, S))
        nc_mask = cand & adm_masks[k]
        if nc_mask:
            new_incl = incl | (1 << k)
            S2 = S + w[k]
            val, colsel = _evaluate_rowset(S2, _bits(nc_mask), new_incl, pairs, sc.z, threshold)
            if val is not None and (threshold is None or val > threshold):
                threshold = best_val = int(val)
                brows = [branch_ids[j] for j in _bits(new_incl)]
                bcols = [other_ids[j] for j in colsel]
                if transpose:
                    brows, bcols = bcols, brows
                best_rect = (brows, bcols)
            stack.append((k + 1, new_incl, nc_mask, S2))
    return best_val, best_rect, nodes


def _node_ub(entry, suffix, nb, w):
    k, incl, cand, S = entry
    idx = list(_bits(cand))
    total = S[idx] + suffix[k][idx]
    return total[total > 0].sum() if idx else 0


def _evaluate_rowset(S, cand: tuple[int, ...], incl: int, pairs, z, threshold=None):
    colpairs = [(ca, cb, g) for ra, ca, rb, cb, g in pairs
                if (incl >> ra) & 1 and (incl >> rb) & 1]
    return _best_colset(S, list(cand), colpairs, z, threshold)


def max_linear_form(m: CommMatrix, form: RectLinearForm, color: int,
                    floor: Fraction | None = None, node_budget: int = 5_000_000,
                    method: str = "auto") -> OracleResult:
    """Maximize the form over all monochromatic rectangles of ``color``.

    With ``floor`` set, only rectangles whose value exceeds the floor are
    sought: the result is the exact maximum if it exceeds the floor, and
    otherwise ``rect`` is None with ``upper == floor``.  Ties keep the first
    maximizer in the fixed search order, so results are deterministic.

    ``method`` picks the search: "box" branches on the positive cells a
    rectangle contains, "rows" on row subsets with an inner column search,
    and "auto" takes whichever has fewer branching items.
    """
    for g in form.groups:
        if g.z > 0:
            raise ValueError("group multipliers must be <= 0")
    if method not in ("auto", "box", "rows"):
        raise ValueError(f"unknown oracle method {method!r}")
    sc = _Scaled(m, form, color)
    if not sc.adm.any():
        if floor is None:
            raise ValueError(f"color {color} does not occur in the matrix")
        return OracleResult(None, None, Fraction(floor))
    # values are integers, so beating the floor means beating its integer part
    scaled_floor = None if floor is None else math.floor(Fraction(floor) * sc.scale)
    if method == "auto":
        n_pos = int((sc.adm & (sc.w > 0)).sum())
        live_rows = int(sc.adm.any(axis=1).sum())
        live_cols = int(sc.adm.any(axis=0).sum())
        method = "box" if n_pos <= min(live_rows, live_cols) else "rows"
    if method == "box":
        best_val, best_rect, nodes, pending = _box(sc, scaled_floor, node_budget)
    else:
        best_val, best_rect, nodes, pending = _rows(sc, scaled_floor, node_budget)
    if pending is not None:
        upper = Fraction(pending) / sc.scale
        if best_val is not None:
            upper = max(upper, Fraction(best_val) / sc.scale)
        if scaled_floor is not None:
            upper = max(upper, Fraction(floor))
        return OracleResult(Rect.of(color, *best_rect) if best_rect else None,
                            Fraction(best_val) / sc.scale if best_val is not None else None,
                            upper, complete=False, nodes=nodes)
    if best_rect is None:
        return OracleResult(None, None, Fraction(floor), nodes=nodes)
    value = Fraction(best_val) / sc.scale
    return OracleResult(Rect.of(color, *best_rect), value, value, nodes=nodes)


def _box(sc: _Scaled, scaled_floor, node_budget: int):
    """Returns (value, (rows, cols), nodes, pending bound or None when complete)."""
    if not (sc.adm & (sc.w > 0)).any():
        # no positive cell: a single cell is best, as larger rectangles only lose
        r, c = max(zip(*np.nonzero(sc.adm)), key=lambda rc: (sc.w[rc], -rc[0], -rc[1]))
        val = int(sc.w[r, c])
        if scaled_floor is not None and val <= scaled_floor:
            return None, None, 1, None
        return val, ([int(r)], [int(c)]), 1, None
    val, rows, cols, nodes, complete, pending = box_search(
        sc.w, sc.adm, sc.pairs, sc.z, scaled_floor, node_budget)
    rect = (rows, cols) if val is not None else None
    return val, rect, nodes, None if complete else pending


def _rows(sc: _Scaled, scaled_floor, node_budget: int):
    best_val, best_rect = None, None
    budget = [node_budget]
    nodes = 0
    try:
        for rows, cols in _components(sc.adm):
            transpose = len(cols) < len(rows)
            val, rect, used = _search_component(sc, rows, cols, transpose, scaled_floor,
                                                (best_val, best_rect), budget)
            nodes += used
            best_val, best_rect = val, rect
    except OracleBudgetExceeded as exc:
        val, rect, pending, used = exc.args[0]
        return val, rect, nodes + used, pending
    return best_val, best_rect, nodes, None


def max_over_colors(m: CommMatrix, form: RectLinearForm, floor: Fraction | None = None,
                    node_budget: int = 5_000_000, method: str = "auto") -> dict[int, OracleResult]:
    return {color: max_linear_form(m, form, color, floor, node_budget, method)
            for color in colors_of(m)}
