"""Branch and bound over the positive cells a rectangle contains.

For a nonempty set K of positive cells let box(K) be rows(K) x cols(K).
Shrinking any rectangle to the box of its positive cells keeps every
positive cell and drops only nonpositive cells and group penalties, so the
maximum of a form is attained at some box(K) (or at a single cell when no
cell is positive).  We enumerate K in a fixed order and prune with

    value(box(D)) + sum over candidate new rows r of max(0, gain(r))
                  + sum over candidate new cols c of max(0, gain(c)),

where gain(r) is row r against the current columns plus every positive cell
in r whose column could also be added, and gain(c) is column c against the
current rows.  Penalties already active in box(D) stay active, so this is
an upper bound for every extension of D by later cells.

The kernel is plain array code: numba compiles it for int64 weights and the
same function runs uncompiled on arrays of Python ints.
"""

from __future__ import annotations

import numpy as np


def _fresh_pair(q, r, c, nr_new, nc_new, pa_r, pa_c, pb_r, pb_c, rowcnt, colcnt):
    """Pair q lies in the box and uses the row or column just added."""
    if not (rowcnt[pa_r[q]] > 0 and rowcnt[pb_r[q]] > 0
            and colcnt[pa_c[q]] > 0 and colcnt[pb_c[q]] > 0):
        return False
    if nr_new and (pa_r[q] == r or pb_r[q] == r):
        return True
    return nc_new and (pa_c[q] == c or pb_c[q] == c)


def _box_kernel(w, adm, pr, pc, prow_start, prow_cols, pa_r, pa_c, pb_r, pb_c, pg,
                pair_start, pair_ids, z, threshold, has_threshold, budget,
                best_rows, best_cols, zero):
    nr, nc = w.shape
    n = pr.shape[0]
    ng = z.shape[0]
    rowcnt = np.zeros(nr, np.int64)
    colcnt = np.zeros(nc, np.int64)
    rowbad = np.zeros(nr, np.int64)  # columns of the box not admissible in this row
    colbad = np.zeros(nc, np.int64)
    rowsum = np.zeros(nr, w.dtype) + zero  # row against the box columns
    colsum = np.zeros(nc, w.dtype) + zero
    gcount = np.zeros(ng, np.int64)
    mark_r = np.full(nr, -1, np.int64)
    mark_c = np.full(nc, -1, np.int64)
    # per depth: branch state, box value, whether row/col were new, parent bound
    state = np.zeros(n + 1, np.int64)
    vals = np.zeros(n + 1, w.dtype) + zero
    newr = np.zeros(n + 1, np.int64)
    newc = np.zeros(n + 1, np.int64)
    ubs = np.zeros(n + 1, w.dtype) + zero
    best = threshold
    found = False
    nodes = 0
    exhausted = False
    pending = zero
    k = 0
    V = zero
    stamp = 0
    while True:
        if state[k] == 0:
            # fresh node at depth k with box value V
            nodes += 1
            stamp += 1
            ub = V
            for j in range(k, n):
                r = pr[j]
                c = pc[j]
                if rowcnt[r] == 0 and mark_r[r] != stamp:
                    mark_r[r] = stamp
                if colcnt[c] == 0 and mark_c[c] != stamp:
                    mark_c[c] = stamp
                    if colsum[c] > 0:
                        ub += colsum[c]
            for j in range(k, n):
                r = pr[j]
                if mark_r[r] == stamp:
                    mark_r[r] = -stamp  # visit each new row once
                    e = rowsum[r]
                    for t in range(prow_start[r], prow_start[r + 1]):
                        c = prow_cols[t]
                        if colcnt[c] == 0 and (mark_c[c] == stamp):
                            e += w[r, c]
                    if e > 0:
                        ub += e
            ubs[k] = ub
            if (has_threshold or found) and ub <= best:
                state[k] = 3
            elif k == n:
                state[k] = 3
            elif nodes > budget:
                exhausted = True
                pending = ub
                break
            else:
                state[k] = 1
        if state[k] == 1:
            # try to include cell k
            state[k] = 2
            r = pr[k]
            c = pc[k]
            if rowcnt[r] > 0 and colcnt[c] > 0:
                # already inside the box: both branches coincide
                state[k] = 3
                vals[k] = V
                newr[k + 1] = 0
                newc[k + 1] = 0
                rowcnt[r] += 1
                colcnt[c] += 1
                state[k + 1] = 0
                k += 1
                continue
            ok = True
            if rowcnt[r] == 0 and rowbad[r] > 0:
                ok = False
            if colcnt[c] == 0 and colbad[c] > 0:
                ok = False
            if rowcnt[r] == 0 and colcnt[c] == 0 and not adm[r, c]:
                ok = False
            if ok:
                vals[k] = V
                nr_new = rowcnt[r] == 0
                nc_new = colcnt[c] == 0
                if nr_new:
                    V += rowsum[r]
                    for cc in range(nc):
                        colsum[cc] += w[r, cc]
                        if not adm[r, cc]:
                            colbad[cc] += 1
                rowcnt[r] += 1
                if nc_new:
                    V += colsum[c]
                    for rr in range(nr):
                        rowsum[rr] += w[rr, c]
                        if not adm[rr, c]:
                            rowbad[rr] += 1
                colcnt[c] += 1
                for t in range(pair_start[k], pair_start[k + 1]):
                    q = pair_ids[t]
                    if _fresh_pair(q, r, c, nr_new, nc_new, pa_r, pa_c, pb_r, pb_c,
                                   rowcnt, colcnt):
                        g = pg[q]
                        if gcount[g] == 0:
                            V += z[g]
                        gcount[g] += 1
                newr[k + 1] = 1 if nr_new else 0
                newc[k + 1] = 1 if nc_new else 0
                if V > best or (not has_threshold and not found):
                    best = V
                    found = True
                    for rr in range(nr):
                        best_rows[rr] = 1 if rowcnt[rr] > 0 else 0
                    for cc in range(nc):
                        best_cols[cc] = 1 if colcnt[cc] > 0 else 0
                state[k + 1] = 0
                k += 1
                continue
        if state[k] == 2:
            # exclude cell k
            state[k] = 3
            state[k + 1] = 0
            newr[k + 1] = -1  # marks an exclude step
            k += 1
            continue
        # state 3: node done, undo the step that led here
        if k == 0:
            break
        k -= 1
        if newr[k + 1] == -1:
            continue
        r = pr[k]
        c = pc[k]
        nr_new = newr[k + 1] == 1
        nc_new = newc[k + 1] == 1
        for t in range(pair_start[k], pair_start[k + 1]):
            q = pair_ids[t]
            if _fresh_pair(q, r, c, nr_new, nc_new, pa_r, pa_c, pb_r, pb_c, rowcnt, colcnt):
                gcount[pg[q]] -= 1
        colcnt[c] -= 1
        if nc_new:
            for rr in range(nr):
                rowsum[rr] -= w[rr, c]
                if not adm[rr, c]:
                    rowbad[rr] -= 1
        rowcnt[r] -= 1
        if nr_new:
            for cc in range(nc):
                colsum[cc] -= w[r, cc]
                if not adm[r, cc]:
                    colbad[cc] -= 1
        V = vals[k]
    if exhausted:
        for d in range(k):
            if state[d] == 2:
                if ubs[d] > pending:
                    pending = ubs[d]
    return best, found, nodes, exhausted, pending


_compiled = None


def _kernel(dtype):
    global _compiled
    if dtype == object:
        return _box_kernel
    if _compiled is None:
        from numba import njit  # imported on first use; it is slow to load
        fresh = njit(cache=True)(_fresh_pair)
        # rebind the helper so the compiled kernel calls its compiled version
        glb = dict(_box_kernel.__globals__, _fresh_pair=fresh)
        func = type(_box_kernel)(_box_kernel.__code__, glb, _box_kernel.__name__)
        _compiled = njit(cache=True)(func)
    return _compiled


def box_search(w: np.ndarray, adm: np.ndarray, pairs, z, threshold, budget: int):
    """Maximize over boxes of positive admissible cells.

    ``pairs`` holds (row_a, col_a, row_b, col_b, group) in local indices and
    ``z`` the integer group multipliers.  Returns (value, rows, cols, nodes,
    complete, pending) where value is None when nothing beats ``threshold``
    and pending bounds every unexplored box when the budget ran out.
    """
    nr, nc = w.shape
    dtype = w.dtype
    cells = [(r, c) for r, c in zip(*np.nonzero(adm & (w > 0)))]
    cells.sort(key=lambda rc: (-w[rc], rc))
    pr = np.array([r for r, _ in cells], np.int64)
    pc = np.array([c for _, c in cells], np.int64)
    prow_start = np.zeros(nr + 1, np.int64)
    prow_cols = []
    for r in range(nr):
        row = [c for c in range(nc) if adm[r, c] and w[r, c] > 0]
        prow_cols += row
        prow_start[r + 1] = len(prow_cols)
    prow_cols = np.array(prow_cols, np.int64)
    pa_r = np.array([p[0] for p in pairs], np.int64)
    pa_c = np.array([p[1] for p in pairs], np.int64)
    pb_r = np.array([p[2] for p in pairs], np.int64)
    pb_c = np.array([p[3] for p in pairs], np.int64)
    pg = np.array([p[4] for p in pairs], np.int64)
    pair_start = np.zeros(len(cells) + 1, np.int64)
    pair_ids = []
    for k, (r, c) in enumerate(cells):
        pair_ids += [q for q, p in enumerate(pairs) if r in (p[0], p[2]) or c in (p[1], p[3])]
        pair_start[k + 1] = len(pair_ids)
    pair_ids = np.array(pair_ids, np.int64)
    zarr = np.array(list(z) or [0], dtype=dtype)
    zero = 0 if dtype == object else np.int64(0)
    has_threshold = threshold is not None
    thr = (0 if dtype == object else np.int64(0)) if threshold is None else threshold
    if dtype != object:
        thr = np.int64(thr)
    best_rows = np.zeros(nr, np.int64)
    best_cols = np.zeros(nc, np.int64)
    best, found, nodes, exhausted, pending = _kernel(dtype)(
        w, adm, pr, pc, prow_start, prow_cols, pa_r, pa_c, pb_r, pb_c, pg, pair_start,
        pair_ids, zarr, thr, has_threshold, budget, best_rows, best_cols, zero)
    value = int(best) if found else None
    rows = [r for r in range(nr) if best_rows[r]] if found else []
    cols = [c for c in range(nc) if best_cols[c]] if found else []
    return value, rows, cols, int(nodes), not exhausted, int(pending)
