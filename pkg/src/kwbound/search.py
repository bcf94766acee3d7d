"""Small exact combinatorial solvers: disjoint rectangle covers and stable sets."""

from __future__ import annotations

from dataclasses import dataclass

from .commmatrix import CommMatrix
from .rects import Rect, is_monochromatic

MAX_IS_VERTICES = 60


class SearchBudgetExceeded(RuntimeError):
    pass


def max_independent_set(n_vertices: int, edges) -> tuple[int, list[int]]:
    """Maximum independent set by branch and bound with a greedy clique-cover bound."""
    if n_vertices > MAX_IS_VERTICES:
        raise ValueError(f"{n_vertices} vertices exceed the cap of {MAX_IS_VERTICES}")
    adj = [0] * n_vertices
    for u, v in edges:
        if u != v:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
    best = [0, 0]

    def clique_cover_bound(cand: int) -> int:
        # number of cliques in a greedy cover of cand bounds any independent subset
        count = 0
        while cand:
            v = (cand & -cand).bit_length() - 1
            clique = 1 << v
            rest = cand & adj[v]
            while rest:
                u = (rest & -rest).bit_length() - 1
                clique |= 1 << u
                rest &= adj[u]
            cand &= ~clique
            count += 1
        return count

    def rec(chosen: int, size: int, cand: int):
        if size > best[0]:
            best[0], best[1] = size, chosen
        if not cand or size + clique_cover_bound(cand) <= best[0]:
            return
        v = (cand & -cand).bit_length() - 1
        rec(chosen | (1 << v), size + 1, cand & ~adj[v] & ~(1 << v))
        rec(chosen, size, cand & ~(1 << v))

    rec(0, 0, (1 << n_vertices) - 1)
    members = [v for v in range(n_vertices) if (best[1] >> v) & 1]
    return best[0], members


@dataclass
class CoverResult:
    count: int | None  # None when the budget ran out
    cover: list[Rect]
    lower: int
    upper: int | None


def min_disjoint_cover(m: CommMatrix, rects: list[Rect], lp_lower: int = 1,
                       node_budget: int = 10_000_000) -> CoverResult:
    """Fewest pairwise-disjoint rectangles covering every cell exactly once.

    Iterative deepening on the cover size; each level branches on the
    uncovered cell with fewest admissible rectangles.  ``rects`` must contain
    every monochromatic rectangle (including non-maximal ones).
    """
    rows, cols = m.shape
    n_cells = rows * cols
    masks = []
    for rect in rects:
        mask = 0
        for r, c in rect.cells():
            mask |= 1 << (r * cols + c)
        masks.append(mask)
    # rectangles of different colors may cover the same cell set; keep one each
    unique: dict[int, int] = {}
    for i, mask in enumerate(masks):
        unique.setdefault(mask, i)
    by_cell: list[list[int]] = [[] for _ in range(n_cells)]
    for mask, i in unique.items():
        k = mask
        while k:
            low = k & -k
            by_cell[low.bit_length() - 1].append(mask)
            k ^= low
    for cell in range(n_cells):
        if not by_cell[cell]:
            raise ValueError(f"cell {cell + 1} is in no rectangle; list is incomplete")
        by_cell[cell].sort(key=lambda mk: -mk.bit_count())
    full = (1 << n_cells) - 1
    budget = [node_budget]

    def search(covered: int, depth: int, path: list[int]) -> list[int] | None:
        budget[0] -= 1
        if budget[0] < 0:
            raise SearchBudgetExceeded
        if covered == full:
            return path
        if depth == 0:
            return None
        best_cell, best_opts = None, None
        free = full & ~covered
        k = free
        while k:
            low = k & -k
            cell = low.bit_length() - 1
            opts = [mk for mk in by_cell[cell] if not mk & covered]
            if best_opts is None or len(opts) < len(best_opts):
                best_cell, best_opts = cell, opts
                if len(opts) <= 1:
                    break
            k ^= low
        if not best_opts:
            return None
        # each remaining rectangle covers at most the largest option's area
        biggest = max(mk.bit_count() for mk in best_opts)
        if free.bit_count() > depth * max(biggest, _largest_free(by_cell, covered, free)):
            return None
        for mk in best_opts:
            found = search(covered | mk, depth - 1, path + [mk])
            if found is not None:
                return found
        return None

    lower = max(1, lp_lower)
    for depth in range(lower, n_cells + 1):
        try:
            found = search(0, depth, [])
        except SearchBudgetExceeded:
            return CoverResult(None, [], depth, None)
        if found is not None:
            cover = [rects[unique[mk]] for mk in found]
            _check_cover(m, cover)
            return CoverResult(depth, cover, depth, depth)
    raise AssertionError("the 1x1 rectangles always give a cover")


def _largest_free(by_cell, covered: int, free: int) -> int:
    best = 0
    k = free
    while k:
        low = k & -k
        for mk in by_cell[low.bit_length() - 1]:
            if not mk & covered:
                best = max(best, mk.bit_count())
                break
        k ^= low
    return best


def _check_cover(m: CommMatrix, cover: list[Rect]) -> None:
    rows, cols = m.shape
    seen = set()
    for rect in cover:
        if not is_monochromatic(m, rect):
            raise AssertionError("cover uses a non-monochromatic rectangle")
        for cell in rect.cells():
            if cell in seen:
                raise AssertionError("cover rectangles overlap")
            seen.add(cell)
    if len(seen) != rows * cols:
        raise AssertionError("cover misses cells")
