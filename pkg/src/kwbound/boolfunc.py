"""Boolean functions, minterms/maxterms, the majority families and formulas.

Assignments are integers: variable ``i`` is bit ``i - 1``.  Bitstrings are
printed with variable 1 leftmost, so ``"110"`` is ``x1 = x2 = 1, x3 = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from . import truthtable as tt

MAX_TABLE_ARITY = 24


@dataclass(frozen=True, order=True)
class BitVector:
    n: int
    bits: int

    def __post_init__(self):
        if not 1 <= self.n <= tt.MAX_PACKED_ARITY:
            raise ValueError(f"bit-count {self.n} out of range")
        if self.bits >> self.n:
            raise ValueError(f"bits above position {self.n} are set")

    @classmethod
    def parse(cls, s: str) -> "BitVector":
        s = s.replace(",", "").replace(" ", "").replace("·", "")
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {s!r}")
        return cls(len(s), sum(1 << k for k, ch in enumerate(s) if ch == "1"))

    def __getitem__(self, i: int) -> int:
        """Value of variable ``i`` (1-based)."""
        return (self.bits >> (i - 1)) & 1

    def __str__(self) -> str:
        return bitstring(self.bits, self.n)

    def weight(self) -> int:
        return self.bits.bit_count()


def bitstring(x: int, n: int, group: int = 0) -> str:
    s = "".join("1" if (x >> k) & 1 else "0" for k in range(n))
    if group:
        s = ",".join(s[k:k + group] for k in range(0, n, group))
    return s


def _as_assignment(x, n: int) -> int:
    if isinstance(x, BitVector):
        if x.n != n:
            raise ValueError(f"arity mismatch: input has {x.n} bits, function has {n}")
        return x.bits
    if isinstance(x, str):
        return _as_assignment(BitVector.parse(x), n)
    x = int(x)
    if not 0 <= x < (1 << n):
        raise ValueError(f"assignment {x} out of range for arity {n}")
    return x


class BooleanFunction:
    """A Boolean function on ``n`` variables.

    Either materialized as a packed truth table (``n <= 24``) or defined by a
    monotone circuit over per-variable operands and evaluated on demand.
    """

    def __init__(self, n: int, table: np.ndarray | None = None,
                 circuit: Callable[[Sequence], object] | None = None, name: str = ""):
        if not 1 <= n <= tt.MAX_PACKED_ARITY:
            raise ValueError(f"arity {n} out of range")
        if table is None and circuit is None:
            raise ValueError("need a table or a circuit")
        if table is not None:
            if n > MAX_TABLE_ARITY:
                raise ValueError(f"tables are only materialized for n <= {MAX_TABLE_ARITY}")
            table = np.asarray(table, dtype=np.uint64)
            if table.shape != (tt.n_words(n),):
                raise ValueError(f"table must hold exactly 2**{n} bits")
        self.n = n
        self.name = name
        self._table = table
        self._circuit = circuit

    @property
    def materialized(self) -> bool:
        return self._table is not None

    @property
    def table(self) -> np.ndarray:
        """Packed truth table; computed afresh (not cached) for on-demand functions."""
        if self._table is not None:
            return self._table
        return self._circuit([tt.variable(i, self.n) for i in range(1, self.n + 1)])

    def evaluate_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        if self._table is not None:
            words = self._table[xs >> 6]
            return ((words >> (xs & 63).astype(np.uint64)) & np.uint64(1)).astype(bool)
        operands = [((xs >> k) & 1).astype(bool) for k in range(self.n)]
        return np.asarray(self._circuit(operands), dtype=bool)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BooleanFunction):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.table, other.table))

    def __hash__(self):
        return hash((self.n, self.table.tobytes()))

    def __repr__(self) -> str:
        label = self.name or "f"
        return f"<BooleanFunction {label} n={self.n}>"

    def to_json(self) -> dict:
        return {"n": self.n, "table_hex": tt.to_hex(self.table, self.n)}

    @classmethod
    def from_json(cls, doc: dict) -> "BooleanFunction":
        n = int(doc["n"])
        return cls(n, tt.from_hex(doc["table_hex"], n))

    @classmethod
    def from_values(cls, values: Sequence[int], name: str = "") -> "BooleanFunction":
        n = int(math.log2(len(values)))
        if 1 << n != len(values):
            raise ValueError("truth table length must be a power of two")
        return cls(n, tt.from_bools(np.asarray(values, dtype=bool)), name=name)


def evaluate(f: BooleanFunction, x) -> int:
    x = _as_assignment(x, f.n)
    if f.materialized:
        return tt.get_bit(f.table, x)
    return int(f.evaluate_many(np.array([x]))[0])


def is_monotone(f: BooleanFunction) -> bool:
    t = f.table
    for i in range(1, f.n + 1):
        lo, hi = tt.cofactors(t, i)
        if np.any(lo & ~hi):
            return False
    return True


def is_self_dual(f: BooleanFunction) -> bool:
    t = f.table
    reflected = t
    for i in range(1, f.n + 1):
        reflected = tt.flip(reflected, i)
    return bool(np.array_equal(t, tt.complement(reflected, f.n)))


@dataclass(frozen=True)
class TermList:
    kind: str  # "minterm" | "maxterm"
    n: int
    terms: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return (BitVector(self.n, t) for t in self.terms)

    def __contains__(self, x) -> bool:
        return _as_assignment(x, self.n) in set(self.terms)

    def strings(self, group: int = 0) -> list[str]:
        return [bitstring(t, self.n, group) for t in self.terms]


def _terms(f: BooleanFunction, kind: str) -> TermList:
    if not is_monotone(f):
        raise ValueError(f"{kind}s are only defined for monotone functions")
    t = f.table
    cond = t.copy() if kind == "minterm" else tt.complement(t, f.n)
    for i in range(1, f.n + 1):
        xi = tt.variable(i, f.n)
        lo, hi = tt.cofactors(t, i)
        if kind == "minterm":
            cond &= ~(xi & lo)
        else:
            cond &= xi | hi
    cond &= tt.valid_mask(f.n)
    return TermList(kind, f.n, tuple(int(x) for x in tt.set_positions(cond)))


def minterms(f: BooleanFunction) -> TermList:
    return _terms(f, "minterm")


def maxterms(f: BooleanFunction) -> TermList:
    return _terms(f, "maxterm")


# -- the three families -----------------------------------------------------

def _maj3(a, b, c):
    return (a & b) | (a & c) | (b & c)


def maj(n: int) -> BooleanFunction:
    if n % 2 == 0 or not 1 <= n <= 23:
        raise ValueError(f"majority needs odd arity in 1..23, got {n}")
    weights = np.bitwise_count(np.arange(1 << n, dtype=np.uint32))
    return BooleanFunction(n, tt.from_bools(weights >= (n + 1) // 2), name=f"MAJ{n}")


def _urec_circuit(h: int):
    def circuit(v):
        out = _maj3(v[0], v[1], v[2])
        for level in range(2, h + 1):
            out = _maj3(out, v[2 * level - 1], v[2 * level])
        return out
    return circuit


def urec_maj(h: int) -> BooleanFunction:
    if h < 1 or 2 * h + 1 > 23:
        raise ValueError(f"height {h} out of range")
    n = 2 * h + 1
    table = _urec_circuit(h)([tt.variable(i, n) for i in range(1, n + 1)])
    return BooleanFunction(n, table, name=f"URecMAJ3^{h}")


def _brec_circuit(v):
    if len(v) == 3:
        return _maj3(*v)
    k = len(v) // 3
    return _maj3(_brec_circuit(v[:k]), _brec_circuit(v[k:2 * k]), _brec_circuit(v[2 * k:]))


def brec_maj(h: int) -> BooleanFunction:
    """Balanced recursive ternary majority; h = 3 is evaluated on demand."""
    if not 1 <= h <= 3:
        raise ValueError(f"height {h} out of range 1..3")
    n = 3 ** h
    name = f"BRecMAJ3^{h}"
    if n > MAX_TABLE_ARITY:
        return BooleanFunction(n, circuit=_brec_circuit, name=name)
    table = _brec_circuit([tt.variable(i, n) for i in range(1, n + 1)])
    return BooleanFunction(n, table, name=name)


# -- formulas -----------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    var: int
    neg: bool = False

    def __str__(self):
        return f"{'~' if self.neg else ''}x{self.var}"


@dataclass(frozen=True)
class Gate:
    op: str  # "and" | "or"
    left: "Formula"
    right: "Formula"

    def __post_init__(self):
        if self.op not in ("and", "or"):
            raise ValueError(f"unknown connective {self.op!r}")

    def __str__(self):
        sym = "∧" if self.op == "and" else "∨"
        return f"({self.left} {sym} {self.right})"


Formula = Union[Literal, Gate]


def AND(a: Formula, b: Formula) -> Gate:
    return Gate("and", a, b)


def OR(a: Formula, b: Formula) -> Gate:
    return Gate("or", a, b)


def formula_size(phi: Formula) -> int:
    if isinstance(phi, Literal):
        return 1
    return formula_size(phi.left) + formula_size(phi.right)


def is_monotone_formula(phi: Formula) -> bool:
    if isinstance(phi, Literal):
        return not phi.neg
    return is_monotone_formula(phi.left) and is_monotone_formula(phi.right)


def max_var(phi: Formula) -> int:
    if isinstance(phi, Literal):
        return phi.var
    return max(max_var(phi.left), max_var(phi.right))


def evaluate_formula(phi: Formula, operands: Sequence, negate: Callable) -> object:
    """Evaluate over per-variable operands (bool arrays, packed tables, ints)."""
    if isinstance(phi, Literal):
        v = operands[phi.var - 1]
        return negate(v) if phi.neg else v
    a = evaluate_formula(phi.left, operands, negate)
    b = evaluate_formula(phi.right, operands, negate)
    return a & b if phi.op == "and" else a | b


def formula_to_function(phi: Formula, n: int) -> BooleanFunction:
    if max_var(phi) > n:
        raise ValueError(f"formula uses x{max_var(phi)} but n = {n}")
    operands = [tt.variable(i, n) for i in range(1, n + 1)]
    table = evaluate_formula(phi, operands, lambda t: tt.complement(t, n))
    return BooleanFunction(n, table)


def formula_on_inputs(phi: Formula, n: int, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.int64)
    operands = [((xs >> k) & 1).astype(bool) for k in range(n)]
    return np.asarray(evaluate_formula(phi, operands, np.logical_not), dtype=bool)


def formula_to_json(phi: Formula) -> dict:
    if isinstance(phi, Literal):
        return {"var": phi.var, "neg": phi.neg}
    return {"op": phi.op, "args": [formula_to_json(phi.left), formula_to_json(phi.right)]}


def formula_from_json(doc: dict) -> Formula:
    if "var" in doc:
        return Literal(int(doc["var"]), bool(doc.get("neg", False)))
    left, right = doc["args"]
    return Gate(doc["op"], formula_from_json(left), formula_from_json(right))


def _maj3_formula(a: Formula, b: Formula, c: Formula) -> Formula:
    return OR(AND(a, b), AND(OR(a, b), c))


def maj3_formula() -> Formula:
    """(x1 ∧ x2) ∨ ((x1 ∨ x2) ∧ x3), size 5."""
    return _maj3_formula(Literal(1), Literal(2), Literal(3))


def urec_formula(h: int) -> Formula:
    """Monotone formula of size 4h + 1; x3 of the MAJ3 formula is substituted recursively."""
    if h < 1:
        raise ValueError("h must be >= 1")
    phi: Formula = Literal(1)
    for level in range(1, h + 1):
        phi = _maj3_formula(Literal(2 * level), Literal(2 * level + 1), phi)
    return phi


def brec_formula(h: int) -> Formula:
    """Monotone formula of size 5**h."""
    if h < 1:
        raise ValueError("h must be >= 1")

    def build(first: int, height: int) -> Formula:
        if height == 0:
            return Literal(first)
        k = 3 ** (height - 1)
        return _maj3_formula(build(first, height - 1), build(first + k, height - 1),
                             build(first + 2 * k, height - 1))

    return build(1, h)


# -- brute-force formula size ----------------------------------------------

@dataclass
class BruteForceResult:
    size: int | None  # None: not found within the cap
    witness: Formula | None
    reason: str = ""  # "", "cap", "memory"

    @property
    def exceeded(self) -> bool:
        return self.size is None


def brute_force_formula_size(f: BooleanFunction, monotone_only: bool = False,
                             size_cap: int = 10, memory_budget: int = 20_000_000
                             ) -> BruteForceResult:
    """Minimal (monotone) formula size by levelwise enumeration of truth tables.

    Level ``s`` holds every table first reachable with ``s`` leaves; it is
    built from all AND/OR combinations of levels ``i`` and ``s - i``.
    ``memory_budget`` bounds both the stored tables and any single combine
    step; hitting it is reported in the result, never raised.
    """
    n = f.n
    if not 1 <= n <= 5:
        raise ValueError("brute force supports 1 <= n <= 5")
    if not 1 <= size_cap <= 10:
        raise ValueError("size_cap must be in 1..10")
    full = (1 << (1 << n)) - 1
    target = int(f.table[0]) & full

    witness: dict[int, tuple] = {}
    levels: list[np.ndarray] = [np.zeros(0, dtype=np.uint64)]
    lits = []
    for i in range(1, n + 1):
        pos = int(tt.variable(i, n)[0]) & full
        for neg in ((False,) if monotone_only else (False, True)):
            table = (full ^ pos) if neg else pos
            if table not in witness:
                witness[table] = ("lit", i, neg)
                lits.append(table)
    levels.append(np.array(sorted(lits), dtype=np.uint64))
    stored = len(witness)

    def result(size):
        return BruteForceResult(size, _rebuild(witness, target))

    if target in witness:
        return result(1)
    for s in range(2, size_cap + 1):
        fresh_tables: list[np.ndarray] = []
        fresh_src: list[tuple] = []
        for i in range(1, s // 2 + 1):
            a, b = levels[i], levels[s - i]
            if a.size * b.size > memory_budget:
                return BruteForceResult(None, None, "memory")
            if a.size == 0 or b.size == 0:
                continue
            for op, combined in (("and", a[:, None] & b[None, :]), ("or", a[:, None] | b[None, :])):
                flat = combined.reshape(-1)
                uniq, first = np.unique(flat, return_index=True)
                fresh_tables.append(uniq)
                fresh_src.append((op, a, b, first))
        new_level = []
        for uniq, (op, a, b, first) in zip(fresh_tables, fresh_src):
            for table, idx in zip(uniq.tolist(), first.tolist()):
                if table in witness:
                    continue
                ia, ib = divmod(idx, b.size)
                witness[table] = (op, int(a[ia]), int(b[ib]))
                new_level.append(table)
        stored += len(new_level)
        if stored > memory_budget:
            return BruteForceResult(None, None, "memory")
        levels.append(np.array(sorted(new_level), dtype=np.uint64))
        if target in witness:
            return result(s)
    return BruteForceResult(None, None, "cap")


def _rebuild(witness: dict, table: int) -> Formula:
    entry = witness[table]
    if entry[0] == "lit":
        return Literal(entry[1], entry[2])
    return Gate(entry[0], _rebuild(witness, entry[1]), _rebuild(witness, entry[2]))
