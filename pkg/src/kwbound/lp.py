"""Exact rational linear programming.

A dense two-phase simplex over ``gmpy2.mpq`` with Bland's rule.  Every
solution is checked against the original problem (primal feasibility, dual
feasibility, complementary slackness, equal objectives) before it is
returned.  :class:`Tableau` is also used directly for column generation,
where columns are appended to a warm tableau between solves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import flint
import numpy as np
from gmpy2 import mpq

ZERO = mpq(0)
ONE = mpq(1)

MAX_NONZEROS = 50_000


def _fq(x) -> "flint.fmpq":
    return flint.fmpq(int(x.numerator), int(x.denominator))


def _mq(x) -> mpq:
    return mpq(int(x.p), int(x.q))


def Q(x) -> mpq:
    if isinstance(x, mpq):
        return x
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        return mpq(Fraction(x).numerator, Fraction(x).denominator)
    return mpq(x)


def to_fraction(x) -> Fraction:
    x = Q(x)
    return Fraction(int(x.numerator), int(x.denominator))


def rational_str(x) -> str:
    x = to_fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s) -> Fraction:
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    return Fraction(str(s))


class LPError(ValueError):
    pass


@dataclass
class Variable:
    name: str
    bound: str = ">=0"  # ">=0" | "<=0" | "free"

    def __post_init__(self):
        if self.bound not in (">=0", "<=0", "free"):
            raise LPError(f"unknown bound {self.bound!r} for {self.name}")


@dataclass
class Constraint:
    coeffs: dict[str, Fraction]
    relation: str  # "<=" | "=" | ">="
    rhs: Fraction
    name: str = ""

    def __post_init__(self):
        if self.relation not in ("<=", "=", ">="):
            raise LPError(f"unknown relation {self.relation!r}")


@dataclass
class LinearProgram:
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[str, Fraction] = field(default_factory=dict)
    sense: str = "max"  # "max" | "min"

    def add_variable(self, name: str, bound: str = ">=0") -> str:
        self.variables.append(Variable(name, bound))
        return name

    def add_constraint(self, coeffs: dict, relation: str, rhs, name: str = "") -> None:
        self.constraints.append(Constraint({k: Fraction(v) for k, v in coeffs.items()},
                                           relation, Fraction(rhs), name))

    def validate(self) -> None:
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise LPError("duplicate variable names")
        known = set(names)
        for con in self.constraints:
            extra = set(con.coeffs) - known
            if extra:
                raise LPError(f"constraint {con.name!r} uses unknown variables {sorted(extra)}")
        if set(self.objective) - known:
            raise LPError("objective uses unknown variables")
        if self.sense not in ("max", "min"):
            raise LPError(f"unknown sense {self.sense!r}")

    def nonzeros(self) -> int:
        return sum(1 for con in self.constraints for v in con.coeffs.values() if v)

    def to_json(self) -> dict:
        return {
            "vars": [{"name": v.name, "bound": v.bound} for v in self.variables],
            "constraints": [{"name": c.name, "coeffs": {k: rational_str(v) for k, v in c.coeffs.items()},
                             "relation": c.relation, "rhs": rational_str(c.rhs)}
                            for c in self.constraints],
            "objective": {"sense": self.sense,
                          "coeffs": {k: rational_str(v) for k, v in self.objective.items()}},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "LinearProgram":
        lp = cls(sense=doc["objective"]["sense"])
        for v in doc["vars"]:
            lp.add_variable(v["name"], v.get("bound", ">=0"))
        for c in doc["constraints"]:
            lp.add_constraint({k: parse_rational(x) for k, x in c["coeffs"].items()},
                              c["relation"], parse_rational(c["rhs"]), c.get("name", ""))
        lp.objective = {k: parse_rational(x) for k, x in doc["objective"]["coeffs"].items()}
        return lp


@dataclass
class LPSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    objective: Fraction | None = None
    primal: dict[str, Fraction] = field(default_factory=dict)
    dual: list[Fraction] = field(default_factory=list)  # one per constraint
    pivots: int = 0


class Tableau:
    """Dense simplex tableau for ``min c.x, A x = b, x >= 0`` with ``b >= 0``.

    The caller supplies a starting basis whose columns form an identity; those
    columns are remembered so that the current basis inverse can be read off
    the tableau, which is what makes appending columns cheap.  Entries are
    ``mpq`` held in numpy object arrays so that row operations run as array
    operations.
    """

    def __init__(self, columns: list[dict[int, mpq]], costs: list, rhs: list,
                 basis: list[int], rule: str = "bland"):
        if rule not in ("bland", "dantzig"):
            raise LPError(f"unknown pivot rule {rule!r}")
        self.rule = rule
        self.m = len(rhs)
        self.n = 0
        self._T = np.full((self.m, 0), ZERO, dtype=object)
        self._c = np.full(0, ZERO, dtype=object)
        self._reserve(len(columns))
        for j, col in enumerate(columns):
            for i, v in col.items():
                self._T[i, j] = Q(v)
        self._c[:len(costs)] = [Q(c) for c in costs]
        self.n = len(columns)
        self.basis = list(basis)
        self.identity_cols = list(basis)
        for i, j in enumerate(basis):
            col = self._T[:, j]
            if col[i] != ONE or np.count_nonzero(col != ZERO) != 1:
                raise LPError("starting basis is not an identity")
        self.rhs = np.array([Q(b) for b in rhs], dtype=object)
        if any(b < 0 for b in self.rhs):
            raise LPError("starting basis is not primal feasible")
        self.blocked: set[int] = set()
        self.pivots = 0
        self._reprice()

    def _reserve(self, n: int) -> None:
        cap = self._T.shape[1]
        if n <= cap:
            return
        cap = max(n, 2 * cap, 16)
        T = np.full((self.m, cap), ZERO, dtype=object)
        T[:, :self.n] = self._T[:, :self.n]
        c = np.full(cap, ZERO, dtype=object)
        c[:self.n] = self._c[:self.n]
        d = np.full(cap, ZERO, dtype=object)
        if hasattr(self, "_d"):
            d[:self.n] = self._d[:self.n]
        self._T, self._c, self._d = T, c, d

    @property
    def rows(self) -> np.ndarray:
        return self._T[:, :self.n]

    @property
    def costs(self) -> np.ndarray:
        return self._c[:self.n]

    @property
    def reduced(self) -> np.ndarray:
        return self._d[:self.n]

    def _cb(self) -> np.ndarray:
        return self._c[self.basis]

    def _reprice(self) -> None:
        cb = self._cb()
        self._d[:self.n] = self._c[:self.n] - cb.dot(self._T[:, :self.n])
        self.value = cb.dot(self.rhs) if self.m else ZERO

    def set_costs(self, costs: list) -> None:
        self._c[:self.n] = [Q(c) for c in costs]
        self._reprice()

    def duals(self) -> list[mpq]:
        """y = c_B B^-1, read from the remembered identity columns."""
        return list(self._cb().dot(self._T[:, self.identity_cols]))

    def add_column(self, col: dict[int, object], cost) -> int:
        return self.add_columns([(col, cost)])[0]

    def add_columns(self, entries: list[tuple[dict[int, object], object]]) -> list[int]:
        """Append columns given in original coordinates; duals are read once."""
        y = np.array(self.duals(), dtype=object)
        self._reserve(self.n + len(entries))
        out = []
        for col, cost in entries:
            idx = [i for i, v in col.items() if v]
            vals = np.array([Q(col[i]) for i in idx], dtype=object)
            cost = Q(cost)
            ids = [self.identity_cols[i] for i in idx]
            j = self.n
            self._T[:, j] = self._T[:, ids].dot(vals) if idx else ZERO
            self._c[j] = cost
            self._d[j] = cost - (y[idx].dot(vals) if idx else ZERO)
            self.n += 1
            out.append(j)
        return out

    def crash(self, target: list[int]) -> bool:
        """Make ``target`` (one column per row) the basis before any pivot.

        The basis is inverted once with FLINT and the tableau rebuilt as
        B^-1 A, instead of pivoting column by column.  Returns True when the
        new basis is primal feasible; on False (singular or infeasible
        basis) the tableau is left unchanged.
        """
        if self.pivots or len(target) != self.m or len(set(target)) != self.m:
            return False
        n = self.n
        A = self._T[:, :n]
        B = flint.fmpq_mat(self.m, self.m, [_fq(v) for v in A[:, target].ravel()])
        try:
            Binv = B.inv()
        except ZeroDivisionError:
            return False
        rhs = Binv * flint.fmpq_mat(self.m, 1, [_fq(v) for v in self.rhs])
        rhs = np.array([_mq(rhs[i, 0]) for i in range(self.m)], dtype=object)
        if any(v < 0 for v in rhs):
            return False
        T = Binv * flint.fmpq_mat(self.m, n, [_fq(v) for v in A.ravel()])
        self._T[:, :n] = np.array([_mq(v) for v in T.entries()],
                                  dtype=object).reshape(self.m, n)
        self.rhs = rhs
        self.basis = list(target)
        self._reprice()
        return True

    def pivot(self, r: int, j: int) -> None:
        T = self._T
        n = self.n
        piv = T[r, j]
        if piv != ONE:
            T[r, :n] = T[r, :n] / piv
            self.rhs[r] = self.rhs[r] / piv
        prow = T[r, :n]
        nz = np.flatnonzero(prow != ZERO)
        pvals = prow[nz]
        col = T[:, j].copy()
        col[r] = ZERO
        hit = np.flatnonzero(col != ZERO)
        if len(hit):
            f = col[hit]
            T[np.ix_(hit, nz)] = T[np.ix_(hit, nz)] - np.multiply.outer(f, pvals)
            br = self.rhs[r]
            if br:
                self.rhs[hit] = self.rhs[hit] - f * br
        dj = self._d[j]
        if dj:
            self._d[nz] = self._d[nz] - dj * pvals
            self.value += dj * self.rhs[r]
        self.basis[r] = j
        self.pivots += 1

    def _entering(self, bland: bool) -> int | None:
        d = self._d[:self.n]
        neg = np.flatnonzero(d < 0)
        if self.blocked:
            neg = [k for k in neg if k not in self.blocked]
        if not len(neg):
            return None
        if bland:
            return int(neg[0])
        best = min(neg, key=lambda k: (d[k], k))
        return int(best)

    def optimize(self, max_pivots: int | None = None) -> str:
        """Primal simplex; returns "optimal", "unbounded" or "pivot-limit".

        The default rule is Bland's (smallest-index entering column, ratio
        ties broken by smallest basic index), which cannot cycle.  The
        "dantzig" rule picks the most negative reduced cost and breaks ratio
        ties lexicographically, which also rules out cycling.
        """
        while True:
            if max_pivots is not None and self.pivots >= max_pivots:
                return "pivot-limit"
            j = self._entering(self.rule == "bland")
            if j is None:
                return "optimal"
            col = self._T[:, j]
            pos = np.flatnonzero(col > 0)
            if not len(pos):
                self.unbounded_column = j
                return "unbounded"
            ratios = self.rhs[pos] / col[pos]
            low = min(ratios)
            tied = [int(pos[k]) for k in range(len(pos)) if ratios[k] == low]
            if len(tied) == 1:
                r = tied[0]
            elif self.rule == "bland":
                r = min(tied, key=lambda i: self.basis[i])
            else:
                r = self._lex_min(tied, col)
            self.pivot(r, j)

    def _lex_min(self, tied: list[int], col) -> int:
        # lexicographic ratio test on the rows of B^-1, which are pairwise distinct
        ids = self.identity_cols
        best, key = None, None
        for i in tied:
            k = list(self._T[i, ids] / col[i])
            if key is None or k < key:
                best, key = i, k
        return best

    def primal(self) -> list[mpq]:
        x = [ZERO] * self.n
        for i, j in enumerate(self.basis):
            x[j] = self.rhs[i]
        return x


def simplex_solve(lp: LinearProgram, max_nonzeros: int = MAX_NONZEROS) -> LPSolution:
    """Solve exactly; duals follow the convention objective = sum(dual * rhs)."""
    lp.validate()
    if lp.nonzeros() > max_nonzeros:
        raise LPError(f"{lp.nonzeros()} nonzeros exceed the cap of {max_nonzeros}")
    # standard form: each variable becomes one or two nonnegative columns
    cols: list[dict[int, mpq]] = []
    costs: list[mpq] = []
    parts: dict[str, list[tuple[int, int]]] = {}
    sign = -1 if lp.sense == "max" else 1
    m = len(lp.constraints)
    for v in lp.variables:
        pieces = {">=0": (1,), "<=0": (-1,), "free": (1, -1)}[v.bound]
        parts[v.name] = []
        for s in pieces:
            col = {}
            for i, con in enumerate(lp.constraints):
                a = con.coeffs.get(v.name, 0)
                if a:
                    col[i] = Q(a) * s
            cols.append(col)
            costs.append(Q(lp.objective.get(v.name, 0)) * s * sign)
            parts[v.name].append((len(cols) - 1, s))
    n_struct = len(cols)
    for i, con in enumerate(lp.constraints):
        if con.relation != "=":
            cols.append({i: ONE if con.relation == "<=" else -ONE})
            costs.append(ZERO)
    rhs = [Q(con.rhs) for con in lp.constraints]
    flip = [b < 0 for b in rhs]
    for col in cols:
        for i in list(col):
            if flip[i]:
                col[i] = -col[i]
    rhs = [-b if f else b for b, f in zip(rhs, flip)]
    n_real = len(cols)
    for i in range(m):
        cols.append({i: ONE})
        costs.append(ZERO)
    artificial = list(range(n_real, n_real + m))

    tab = Tableau(cols, [ZERO] * n_real + [ONE] * m, rhs, artificial)
    status = tab.optimize()
    pivots = tab.pivots
    if tab.value > 0:
        return LPSolution("infeasible", pivots=pivots)
    # drive remaining artificials out where possible
    for i in range(m):
        if tab.basis[i] >= n_real:
            k = next((k for k in range(n_real) if tab.rows[i][k]), None)
            if k is not None:
                tab.pivot(i, k)
    tab.blocked = set(artificial)
    tab.set_costs(costs)
    status = tab.optimize()
    pivots = tab.pivots
    if status == "unbounded":
        return LPSolution("unbounded", pivots=pivots)
    x = tab.primal()
    primal = {}
    for name, pieces in parts.items():
        primal[name] = to_fraction(sum((x[j] * s for j, s in pieces), ZERO))
    y = tab.duals()
    # tableau duals are for the min problem on sign-normalized rows
    dual = []
    for i in range(m):
        yi = -y[i] if flip[i] else y[i]
        dual.append(to_fraction(yi * sign))
    objective = to_fraction(tab.value * sign)
    sol = LPSolution("optimal", objective, primal, dual, pivots)
    check_optimality(lp, sol)
    return sol


def check_optimality(lp: LinearProgram, sol: LPSolution) -> None:
    """Raise LPError unless ``sol`` is primal/dual feasible with equal objectives."""
    x = sol.primal
    obj = sum((lp.objective.get(v.name, 0) * x[v.name] for v in lp.variables), Fraction(0))
    if obj != sol.objective:
        raise LPError("objective does not match the primal point")
    for v in lp.variables:
        if (v.bound == ">=0" and x[v.name] < 0) or (v.bound == "<=0" and x[v.name] > 0):
            raise LPError(f"variable {v.name} violates its bound")
    # max problem: dual y with y >= 0 on <=, y <= 0 on >=; reduced cost c - yA <= 0 on >=0 vars
    s = 1 if lp.sense == "max" else -1
    for con, y in zip(lp.constraints, sol.dual):
        lhs = sum((a * x[k] for k, a in con.coeffs.items()), Fraction(0))
        ok = {"<=": lhs <= con.rhs, ">=": lhs >= con.rhs, "=": lhs == con.rhs}[con.relation]
        if not ok:
            raise LPError(f"constraint {con.name!r} violated")
        if (con.relation == "<=" and s * y < 0) or (con.relation == ">=" and s * y > 0):
            raise LPError(f"dual of {con.name!r} has the wrong sign")
        if y and lhs != con.rhs:
            raise LPError(f"complementary slackness fails on {con.name!r}")
    col_dot = {v.name: Fraction(0) for v in lp.variables}
    for con, y in zip(lp.constraints, sol.dual):
        if y:
            for k, a in con.coeffs.items():
                col_dot[k] += a * y
    for v in lp.variables:
        red = s * (lp.objective.get(v.name, 0) - col_dot[v.name])
        bad = {">=0": red > 0, "<=0": red < 0, "free": red != 0}[v.bound]
        if bad:
            raise LPError(f"dual infeasible at variable {v.name}")
        if red and x[v.name]:
            raise LPError(f"complementary slackness fails at variable {v.name}")
    dual_obj = sum((y * con.rhs for con, y in zip(lp.constraints, sol.dual)), Fraction(0))
    if dual_obj != sol.objective:
        raise LPError("primal and dual objectives differ")


def weak_duality_gap(lp: LinearProgram, dual_point: Iterable) -> Fraction:
    """Objective of a caller-supplied dual point, after checking its feasibility."""
    y = [Fraction(v) for v in dual_point]
    s = 1 if lp.sense == "max" else -1
    for con, yi in zip(lp.constraints, y):
        if (con.relation == "<=" and s * yi < 0) or (con.relation == ">=" and s * yi > 0):
            raise LPError("dual point has a wrong-signed multiplier")
    for v in lp.variables:
        red = s * (lp.objective.get(v.name, 0)
                   - sum((con.coeffs.get(v.name, 0) * yi for con, yi in zip(lp.constraints, y)),
                         Fraction(0)))
        if {">=0": red > 0, "<=0": red < 0, "free": red != 0}[v.bound]:
            raise LPError(f"dual point infeasible at {v.name}")
    return sum((yi * con.rhs for con, yi in zip(lp.constraints, y)), Fraction(0))
