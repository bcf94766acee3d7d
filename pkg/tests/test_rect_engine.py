from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from kwbound.builders import cert_maj3
from kwbound.commmatrix import (brec2_submatrix, build_matrix, fig1_matrix, singleton_cells,
                                urec_submatrix)
from kwbound.boolfunc import maj
from kwbound.rects import (EnumerationCapExceeded, PenaltyGroup, Rect, RectLinearForm,
                           enumerate_all_mono_rects, form_value, group_contains,
                           is_monochromatic, max_linear_form, max_over_colors,
                           rect_closure_check, rects_intersect)


def idx(m, rows=(), cols=()):
    rl = [m.row_label(i) for i in range(m.shape[0])]
    cl = [m.col_label(j) for j in range(m.shape[1])]
    return [rl.index(r) for r in rows], [cl.index(c) for c in cols]


def serial_of(m, row, col):
    (r,), (c,) = idx(m, [row], [col])
    return m.serial(r, c)


# -- is_monochromatic / closure ---------------------------------------------

def test_mono_fig1_two_by_two():
    m = fig1_matrix()
    assert is_monochromatic(m, Rect.of(1, *idx(m, ["110", "101"], ["010", "001"])))


def test_mono_fig1_no_common_index():
    m = fig1_matrix()
    rows, cols = idx(m, ["110", "101"], ["100"])
    assert not any(is_monochromatic(m, Rect.of(i, rows, cols)) for i in (1, 2, 3))


def test_mono_single_cell():
    m = fig1_matrix()
    for s, i in singleton_cells(m):
        r, c = m.locate(s)
        assert is_monochromatic(m, Rect.of(i, [r], [c]))


def test_mono_out_of_bounds():
    with pytest.raises(ValueError):
        is_monochromatic(fig1_matrix(), Rect.of(1, [3], [0]))


def test_closure_spans_and_colors():
    m = fig1_matrix()
    rect = rect_closure_check(m, [serial_of(m, "110", "010"), serial_of(m, "101", "001")])
    assert rect == Rect.of(1, *idx(m, ["110", "101"], ["010", "001"]))


def test_closure_corner_pair_shares_index_two():
    # [DERIVED] corners of 110/011 x 100/001 are {2},{1,2,3},{1,2,3},{2}
    m = fig1_matrix()
    rect = rect_closure_check(m, [serial_of(m, "110", "100"), serial_of(m, "011", "001")])
    assert rect == Rect.of(2, *idx(m, ["110", "011"], ["100", "001"]))


def test_closure_failure():
    # corners {2},{1},{3},{1,2,3} share nothing
    m = fig1_matrix()
    assert rect_closure_check(m, [serial_of(m, "110", "100"), serial_of(m, "101", "010")]) is None


def test_closure_one_cell():
    m = fig1_matrix()
    s = serial_of(m, "110", "100")
    r, c = m.locate(s)
    assert rect_closure_check(m, [s]) == Rect.of(2, [r], [c])


# -- enumeration -------------------------------------------------------------

def test_enumerate_fig1():
    m = fig1_matrix()
    rects = enumerate_all_mono_rects(m)
    ones = [x for x in rects if x.size == 1]
    assert len({(x.rowset, x.colset) for x in ones}) == 9
    for i, rows, cols in ((1, ["110", "101"], ["010", "001"]),
                          (2, ["110", "011"], ["100", "001"]),
                          (3, ["101", "011"], ["100", "010"])):
        assert Rect.of(i, *idx(m, rows, cols)) in rects
    assert len(set(rects)) == len(rects)
    assert rects == sorted(rects, key=Rect.sort_key)


def test_enumerate_single_cell_two_colors():
    m = build_matrix(maj(3), "general", (["110"], ["000"]))
    assert m.cell(0, 0) == (1, 2)
    assert [x.color for x in enumerate_all_mono_rects(m)] == [1, 2]


def test_enumerate_disjoint_cells_gives_unit_rects():
    # x1 and x2 monotone: cells {2} and {1}
    m = build_matrix(maj(3), "monotone", (["110"], ["100", "010"]))
    rects = enumerate_all_mono_rects(m)
    assert len(rects) == 2 and all(x.size == 1 for x in rects)


def test_enumerate_cap():
    with pytest.raises(EnumerationCapExceeded):
        enumerate_all_mono_rects(brec2_submatrix()[0], cap=100)


def test_enumerated_rects_are_mono():
    m = brec2_submatrix()[0]
    assert all(is_monochromatic(m, x) for x in enumerate_all_mono_rects(m))


# -- intersection ------------------------------------------------------------

def test_intersect_identical():
    r = Rect.of(1, [0, 1], [2])
    assert rects_intersect(r, r)


def test_intersect_disjoint_rows():
    assert not rects_intersect(Rect.of(1, [0], [0, 1]), Rect.of(1, [1], [0, 1]))


def test_intersect_shared_row_and_col():
    assert rects_intersect(Rect.of(1, [1, 2], [5, 6]), Rect.of(2, [2, 3], [4, 5]))


def test_rect_json_roundtrip():
    r = Rect.of(3, [0, 4], [1, 2])
    assert Rect.from_json(r.to_json()) == r
    assert r.to_json() == {"color": 3, "rows": [0, 4], "cols": [1, 2]}


# -- oracle ------------------------------------------------------------------

def singleton_form(m):
    return RectLinearForm({s: Fraction(1) for s, _ in singleton_cells(m)})


@pytest.mark.parametrize("method", ["auto", "box", "rows"])
def test_oracle_two_singletons(method):
    m = fig1_matrix()
    res = max_linear_form(m, singleton_form(m), 1, method=method)
    assert res.value == 2 and res.exact
    assert res.rect == Rect.of(1, *idx(m, ["110", "101"], ["010", "001"]))


@pytest.mark.parametrize("method", ["auto", "box", "rows"])
def test_oracle_with_clique_penalty(method):
    # [PAPER] the clique relaxes the rectangle limit by 1
    m = fig1_matrix()
    form = singleton_form(m)
    form.groups = [q.group() for q in cert_maj3().cliques]
    assert form.groups[0].z == -1
    res = max_over_colors(m, form, method=method)
    assert max(r.value for r in res.values()) == 1


def test_oracle_zero_form():
    m = fig1_matrix()
    assert all(r.value == 0 for r in max_over_colors(m, RectLinearForm()).values())


def test_oracle_absent_color():
    m = fig1_matrix()
    with pytest.raises(ValueError):
        max_linear_form(m, RectLinearForm(), 4)
    res = max_linear_form(m, RectLinearForm(), 4, floor=Fraction(1))
    assert res.rect is None and res.upper == 1


def test_oracle_rejects_positive_multiplier():
    with pytest.raises(ValueError):
        PenaltyGroup(((1, 2),), Fraction(1))


def test_oracle_floor_semantics():
    m = fig1_matrix()
    form = singleton_form(m)
    above = max_linear_form(m, form, 1, floor=Fraction(3, 2))
    assert above.value == 2
    below = max_linear_form(m, form, 1, floor=Fraction(2))
    assert below.rect is None and below.upper == 2


def test_oracle_budget_reports_interval():
    m = brec2_submatrix()[0]
    form = RectLinearForm({s: Fraction(1, 4) for s in range(1, 82)})
    res = max_linear_form(m, form, 1, node_budget=1, method="rows")
    exact = max_linear_form(m, form, 1)
    assert not res.complete or res.value == exact.value
    if not res.complete:
        assert res.upper >= exact.value
        assert res.value is None or res.value <= exact.value


def random_form(m, rng, denom=12):
    rows, cols = m.shape
    n = rows * cols
    weights = {}
    for s in rng.choice(np.arange(1, n + 1), size=int(rng.integers(1, n + 1)), replace=False):
        weights[int(s)] = Fraction(int(rng.integers(-2 * denom, 2 * denom + 1)), denom)
    sing = singleton_cells(m)
    groups = []
    by_index = {}
    for s, i in sing:
        by_index.setdefault(i, []).append(s)
    for _ in range(int(rng.integers(0, 4))):
        i = int(rng.choice(sorted(by_index)))
        pairs = list(combinations(by_index[i], 2))
        if not pairs:
            continue
        pick = rng.choice(len(pairs), size=min(len(pairs), int(rng.integers(1, 4))),
                          replace=False)
        groups.append(PenaltyGroup(tuple(pairs[k] for k in sorted(pick)),
                                   Fraction(-int(rng.integers(0, 2 * denom)), denom)))
    return RectLinearForm(weights, groups)


def brute_max(m, rects, form):
    """Independent maximum: integer-scaled sums over the enumerated list."""
    rows, cols = m.shape
    w = np.zeros((rows, cols), dtype=np.int64)
    for s, v in form.weights.items():
        r, c = m.locate(s)
        w[r, c] = int(v * 12)
    best = {}
    for x in rects:
        val = int(w[np.ix_(x.rows, x.cols)].sum())
        val += sum(int(g.z * 12) for g in form.groups if group_contains(m, g, x))
        best[x.color] = max(best.get(x.color, val), val)
    return {k: Fraction(v, 12) for k, v in best.items()}


@pytest.mark.parametrize("name", ["fig1", "brec2", "urec2"])
def test_oracle_matches_enumeration(name):
    m = {"fig1": fig1_matrix, "brec2": lambda: brec2_submatrix()[0],
         "urec2": lambda: urec_submatrix(2)[0]}[name]()
    rects = enumerate_all_mono_rects(m)
    rng = np.random.default_rng(2024)
    for _ in range(100 if name != "urec2" else 40):
        form = random_form(m, rng)
        expected = brute_max(m, rects, form)
        for method in ("box", "rows"):
            got = max_over_colors(m, form, method=method)
            for color, res in got.items():
                assert res.exact
                assert res.value == expected[color]
                assert is_monochromatic(m, res.rect)
                assert form_value(m, form, res.rect) == res.value


# -- invariants --------------------------------------------------------------

@pytest.mark.parametrize("name", ["fig1", "brec2", "urec2"])
def test_singleton_exclusivity(name):
    m = {"fig1": fig1_matrix, "brec2": lambda: brec2_submatrix()[0],
         "urec2": lambda: urec_submatrix(2)[0]}[name]()
    sing = singleton_cells(m)
    locs = [(m.locate(s), i) for s, i in sing]
    for x in enumerate_all_mono_rects(m):
        kinds = {i for (r, c), i in locs if x.contains(r, c)}
        assert len(kinds) <= 1


def test_group_membership_monotone():
    m = brec2_submatrix()[0]
    rects = enumerate_all_mono_rects(m)
    rng = np.random.default_rng(5)
    groups = [g for g in (random_form(m, rng).groups for _ in range(20)) for g in g]
    assert groups
    by_color = {}
    for x in rects:
        by_color.setdefault(x.color, []).append(x)
    for g in groups:
        for xs in by_color.values():
            inside = [x for x in xs if group_contains(m, g, x)]
            for a in inside:
                for b in xs:
                    if a.rowset & ~b.rowset == 0 and a.colset & ~b.colset == 0:
                        assert group_contains(m, g, b)
