"""Karchmer-Wigderson communication matrices and the structured submatrices.

Cells hold index sets as bit masks: index ``i`` is bit ``i - 1``.  Cells are
addressed either by 0-based ``(row, col)`` or by a 1-based row-major serial
number, the numbering used for the 9x9 BRecMAJ submatrix figure.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import truthtable as tt
from .boolfunc import (BooleanFunction, bitstring, brec_maj, maj, maxterms, minterms,
                       urec_maj)

MAX_CELLS = 10_000_000


def index_set(mask: int) -> tuple[int, ...]:
    return tuple(k + 1 for k in range(int(mask).bit_length()) if (int(mask) >> k) & 1)


def index_mask(indices) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << (i - 1)
    return mask


@dataclass(frozen=True, eq=False)
class CommMatrix:
    mode: str  # "general" | "monotone"
    n: int
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    cells: np.ndarray  # uint64, shape (len(rows), len(cols))
    provenance: str = ""

    def __post_init__(self):
        if self.mode not in ("general", "monotone"):
            raise ValueError(f"unknown mode {self.mode!r}")
        self.cells.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    @property
    def n_cells(self) -> int:
        return len(self.rows) * len(self.cols)

    def cell(self, r: int, c: int) -> tuple[int, ...]:
        return index_set(self.cells[r, c])

    def serial(self, r: int, c: int) -> int:
        return r * len(self.cols) + c + 1

    def locate(self, serial: int) -> tuple[int, int]:
        if not 1 <= serial <= self.n_cells:
            raise ValueError(f"serial {serial} outside 1..{self.n_cells}")
        return divmod(serial - 1, len(self.cols))

    def cell_by_serial(self, serial: int) -> tuple[int, ...]:
        return self.cell(*self.locate(serial))

    def row_label(self, r: int, group: int = 0) -> str:
        return bitstring(self.rows[r], self.n, group)

    def col_label(self, c: int, group: int = 0) -> str:
        return bitstring(self.cols[c], self.n, group)

    def restrict(self, row_idx, col_idx, provenance: str = "") -> "CommMatrix":
        row_idx, col_idx = list(row_idx), list(col_idx)
        return CommMatrix(self.mode, self.n, tuple(self.rows[r] for r in row_idx),
                          tuple(self.cols[c] for c in col_idx),
                          np.array(self.cells[np.ix_(row_idx, col_idx)]),
                          provenance or self.provenance)

    def same_as(self, other: "CommMatrix") -> bool:
        return (self.mode == other.mode and self.n == other.n and self.rows == other.rows
                and self.cols == other.cols and bool(np.array_equal(self.cells, other.cells)))

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "n": self.n,
            "rows": [self.row_label(r) for r in range(len(self.rows))],
            "cols": [self.col_label(c) for c in range(len(self.cols))],
            "cells": [[list(self.cell(r, c)) for c in range(len(self.cols))]
                      for r in range(len(self.rows))],
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "CommMatrix":
        n = int(doc["n"])
        rows = tuple(_parse_bits(s, n) for s in doc["rows"])
        cols = tuple(_parse_bits(s, n) for s in doc["cols"])
        cells = np.array([[index_mask(c) for c in line] for line in doc["cells"]],
                         dtype=np.uint64).reshape(len(rows), len(cols))
        m = cls(doc["mode"], n, rows, cols, cells, doc.get("provenance", ""))
        if not np.array_equal(cells, _compute_cells(m.mode, rows, cols)):
            raise ValueError("cells disagree with the row/column assignments")
        return m

    def to_csv(self, group: int = 0) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([""] + [self.col_label(c, group) for c in range(len(self.cols))])
        for r in range(len(self.rows)):
            w.writerow([self.row_label(r, group)]
                       + [",".join(map(str, self.cell(r, c))) for c in range(len(self.cols))])
        return buf.getvalue()


def _parse_bits(s: str, n: int) -> int:
    s = s.replace(",", "")
    if len(s) != n:
        raise ValueError(f"bitstring {s!r} has wrong length for n = {n}")
    return sum(1 << k for k, ch in enumerate(s) if ch == "1")


def _compute_cells(mode: str, rows, cols) -> np.ndarray:
    r = np.array(rows, dtype=np.uint64)[:, None]
    c = np.array(cols, dtype=np.uint64)[None, :]
    return (r ^ c) if mode == "general" else (r & ~c)


def build_matrix(f: BooleanFunction, mode: str = "general", restriction="terms",
                 provenance: str = "") -> CommMatrix:
    """Communication matrix of ``f``.

    ``restriction`` is ``"full"`` (all 1-inputs x all 0-inputs), ``"terms"``
    (minterms x maxterms) or an explicit ``(rows, cols)`` pair of assignment
    lists, which is kept in the given order.
    """
    if f.n > 23:
        raise ValueError("communication matrices need n <= 23")
    label = provenance or f"{f.name or 'f'} {mode}"
    if isinstance(restriction, str):
        if restriction == "terms":
            rows = minterms(f).terms
            cols = maxterms(f).terms
            label += " terms"
        elif restriction == "full":
            if mode == "monotone" and not _monotone(f):
                raise ValueError("monotone matrices need a monotone function")
            t = f.table
            rows = tuple(int(x) for x in tt.set_positions(t))
            cols = tuple(int(x) for x in tt.set_positions(tt.complement(t, f.n)))
            label += " full"
        else:
            raise ValueError(f"unknown restriction {restriction!r}")
    else:
        rows, cols = (tuple(int(_as_int(x, f.n)) for x in part) for part in restriction)
        bad = [x for x in rows if not f.evaluate_many([x])[0]]
        bad += [y for y in cols if f.evaluate_many([y])[0]]
        if bad:
            raise ValueError(f"explicit rows must be 1-inputs and cols 0-inputs: {bad[:3]}")
    if len(rows) * len(cols) > MAX_CELLS:
        raise ValueError(f"{len(rows)}x{len(cols)} matrix exceeds the {MAX_CELLS} cell cap")
    cells = _compute_cells(mode, rows, cols)
    if cells.size and not np.all(cells):
        r, c = map(int, np.argwhere(cells == 0)[0])
        raise ValueError(f"empty cell at ({bitstring(rows[r], f.n)}, {bitstring(cols[c], f.n)})")
    return CommMatrix(mode, f.n, tuple(rows), tuple(cols), cells, label)


def _monotone(f):
    from .boolfunc import is_monotone
    return is_monotone(f)


def _as_int(x, n):
    if isinstance(x, str):
        return _parse_bits(x, n)
    if hasattr(x, "bits"):
        return x.bits
    return int(x)


def singleton_cells(m: CommMatrix) -> list[tuple[int, int]]:
    """(serial, index) for every single-index cell, row-major."""
    out = []
    flat = m.cells.reshape(-1)
    for pos in np.nonzero(np.bitwise_count(flat) == 1)[0]:
        out.append((int(pos) + 1, int(flat[pos]).bit_length()))
    return out


# -- structured submatrices --------------------------------------------------

@dataclass
class SubmatrixSpec:
    family: str  # "maj" | "urec" | "brec"
    parameter: int
    blocks: dict = field(default_factory=dict)

    def __repr__(self):
        return f"SubmatrixSpec({self.family}, {self.parameter}, blocks={sorted(self.blocks)})"


_MAJ3_ROWS = (0b011, 0b101, 0b110)  # 110, 101, 011
_MAJ3_COLS = (0b001, 0b010, 0b100)  # 100, 010, 001


def _urec_terms(h: int):
    """Rows/cols of S_h in figure order, plus the nested S_l copies.

    Each copy is ``(level, rows, cols)`` with local index lists; the first row
    of a level-l copy is its "11" minterm, then the "01" block, then "10";
    the first col is "00", then "10", then "01".
    """
    if h == 1:
        return list(_MAJ3_ROWS), list(_MAJ3_COLS), [(1, [0, 1, 2], [0, 1, 2])]
    rows0, cols0, copies0 = _urec_terms(h - 1)
    k = len(rows0)
    low = (1 << (2 * h - 1)) - 1
    a, b = 1 << (2 * h - 1), 1 << (2 * h)  # x_{2h}, x_{2h+1}
    rows = [a | b] + [r | b for r in rows0] + [r | a for r in rows0]
    cols = [low] + [c | a for c in cols0] + [c | b for c in cols0]
    copies = [(h, list(range(2 * k + 1)), list(range(2 * k + 1)))]
    # S_{h-1} sits at (01, 01) and (10, 10)
    for (lv, rr, cc) in copies0:
        copies.append((lv, [1 + r for r in rr], [1 + k + c for c in cc]))
    for (lv, rr, cc) in copies0:
        copies.append((lv, [1 + k + r for r in rr], [1 + c for c in cc]))
    return rows, cols, copies


def urec_submatrix(h: int, mode: str = "general") -> tuple[CommMatrix, SubmatrixSpec]:
    """S_h for URecMAJ_3^h: all minterms x maxterms in the recursive figure order."""
    if not 1 <= h <= 5:
        raise ValueError("urec submatrix supports 1 <= h <= 5")
    rows, cols, copies = _urec_terms(h)
    f = urec_maj(h)
    m = build_matrix(f, mode, (rows, cols), provenance=f"URecMAJ3^{h} S_{h}")
    s1 = [(rr, cc) for lv, rr, cc in copies if lv == 1]
    all_rows = sorted({r for rr, _ in s1 for r in rr})
    all_cols = sorted({c for _, cc in s1 for c in cc})
    spec = SubmatrixSpec("urec", h, {
        "copies": copies,
        "S1": s1,
        "ALL-S1": (all_rows, all_cols),
    })
    return m, spec


_PAT_ROWS = ("110", "101", "011")
_PAT_COLS = ("100", "010", "001")


def _brec_term(patterns, kind: str) -> str:
    """Bitstring of the same-structure term with top-level pattern first."""
    if not patterns:
        return "1" if kind == "min" else "0"
    inner = _brec_term(patterns[1:], kind)
    width = len(inner)
    fill = "0" if kind == "min" else "1"
    return "".join(inner if (ch == "1") == (kind == "min") else fill * width
                   for ch in patterns[0])


def brec_terms(h: int):
    """Pattern tuples (top level first) and assignments for the 3^h rows and cols."""
    row_pats = list(product(_PAT_ROWS, repeat=h))
    col_pats = list(product(_PAT_COLS, repeat=h))
    n = 3 ** h
    rows = [_parse_bits(_brec_term(p, "min"), n) for p in row_pats]
    cols = [_parse_bits(_brec_term(p, "max"), n) for p in col_pats]
    return row_pats, col_pats, rows, cols


# S_{h-1}(k) blocks of the top-level 3x3 layout (row pattern, col pattern) -> k
_BREC_S_BLOCKS = {(0, 0): 2, (0, 1): 1, (1, 0): 3, (1, 2): 1, (2, 1): 3, (2, 2): 2}
_BREC_T_BLOCKS = {(0, 2): (1, 2), (1, 1): (1, 3), (2, 0): (2, 3)}


def brec_submatrix(h: int) -> tuple[CommMatrix, SubmatrixSpec]:
    """Monotone S_h for BRecMAJ_3^h over the 3^h same-structure minterms/maxterms."""
    if not 1 <= h <= 3:
        raise ValueError("brec submatrix supports 1 <= h <= 3")
    row_pats, col_pats, rows, cols = brec_terms(h)
    n = 3 ** h
    cells = _compute_cells("monotone", rows, cols)
    if not np.all(cells):
        raise AssertionError("same-structure terms produced an empty cell")
    f = brec_maj(h)
    got = f.evaluate_many(rows), f.evaluate_many(cols)
    if not (got[0].all() and not got[1].any()):
        raise AssertionError("same-structure terms do not evaluate correctly")
    m = CommMatrix("monotone", n, tuple(rows), tuple(cols), cells, f"BRecMAJ3^{h} S_{h}")
    side = 3 ** (h - 1)
    top = {}
    for (i, j), k in _BREC_S_BLOCKS.items():
        top[f"S(k={k})@{_PAT_ROWS[i]},{_PAT_COLS[j]}"] = (
            list(range(i * side, (i + 1) * side)), list(range(j * side, (j + 1) * side)))
    for (i, j), pair in _BREC_T_BLOCKS.items():
        top[f"T{pair}@{_PAT_ROWS[i]},{_PAT_COLS[j]}"] = (
            list(range(i * side, (i + 1) * side)), list(range(j * side, (j + 1) * side)))
    spec = SubmatrixSpec("brec", h, {
        "row_patterns": row_pats,
        "col_patterns": col_pats,
        "top": top,
        "S2": _brec_s2_copies(h) if h >= 2 else [],
    })
    return m, spec


def _brec_s2_copies(h: int) -> list[tuple[list[int], list[int]]]:
    """Row/col index lists (in local 9x9 figure order) of every second-level S_2 copy."""
    copies = []
    s_pairs = sorted(_BREC_S_BLOCKS)
    for upper in product(s_pairs, repeat=h - 2):
        r0 = c0 = 0
        for (i, j) in upper:
            r0 = 3 * r0 + i
            c0 = 3 * c0 + j
        copies.append((list(range(r0 * 9, r0 * 9 + 9)), list(range(c0 * 9, c0 * 9 + 9))))
    return copies


def brec2_submatrix() -> tuple[CommMatrix, SubmatrixSpec]:
    """The 9x9 monotone submatrix of BRecMAJ_3^2 with the figure's row/col order."""
    return brec_submatrix(2)


def maj_matrix(l: int, mode: str = "general") -> CommMatrix:
    return build_matrix(maj(2 * l + 1), mode, "terms")


def fig1_matrix(mode: str = "general") -> CommMatrix:
    return maj_matrix(1, mode)
