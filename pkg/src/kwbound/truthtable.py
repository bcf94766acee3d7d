"""Packed truth tables.

A truth table over ``n`` variables is a numpy ``uint64`` array holding 2**n
bits; assignment ``x`` lives at bit ``x % 64`` of word ``x // 64``.  Variable
``i`` (1-based) is bit ``i - 1`` of the assignment index.  Tables with
``n < 6`` use a single word whose bits above 2**n are kept at zero.
"""

from __future__ import annotations

import numpy as np

MAX_PACKED_ARITY = 27

_LOW_MASKS = [
    0xAAAAAAAAAAAAAAAA,
    0xCCCCCCCCCCCCCCCC,
    0xF0F0F0F0F0F0F0F0,
    0xFF00FF00FF00FF00,
    0xFFFF0000FFFF0000,
    0xFFFFFFFF00000000,
]


def n_words(n: int) -> int:
    return 1 if n < 6 else 1 << (n - 6)


def valid_mask(n: int) -> np.ndarray:
    words = np.full(n_words(n), np.uint64(0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
    if n < 6:
        words[0] = np.uint64((1 << (1 << n)) - 1)
    return words


def zeros(n: int) -> np.ndarray:
    return np.zeros(n_words(n), dtype=np.uint64)


def variable(i: int, n: int) -> np.ndarray:
    """Table of the projection x_i."""
    if not 1 <= i <= n:
        raise ValueError(f"variable {i} out of range for arity {n}")
    p = i - 1
    if p < 6:
        t = np.full(n_words(n), np.uint64(_LOW_MASKS[p]), dtype=np.uint64)
        return t & valid_mask(n)
    stride = 1 << (p - 6)
    t = zeros(n).reshape(-1, 2, stride)
    t[:, 1, :] = np.uint64(0xFFFFFFFFFFFFFFFF)
    return t.reshape(-1)


def complement(t: np.ndarray, n: int) -> np.ndarray:
    return ~t & valid_mask(n)


def cofactors(t: np.ndarray, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Return tables of x -> t[x with bit i cleared] and x -> t[x with bit i set]."""
    p = i - 1
    if p < 6:
        s = np.uint64(1 << p)
        m = np.uint64(_LOW_MASKS[p])
        lo = t & ~m
        hi = t & m
        return lo | (lo << s), hi | (hi >> s)
    stride = 1 << (p - 6)
    w = t.reshape(-1, 2, stride)
    lo = np.repeat(w[:, 0:1, :], 2, axis=1).reshape(-1)
    hi = np.repeat(w[:, 1:2, :], 2, axis=1).reshape(-1)
    return lo, hi


def flip(t: np.ndarray, i: int) -> np.ndarray:
    """Table of x -> t[x xor e_i]."""
    p = i - 1
    if p < 6:
        s = np.uint64(1 << p)
        m = np.uint64(_LOW_MASKS[p])
        return ((t & m) >> s) | ((t & ~m) << s)
    stride = 1 << (p - 6)
    return t.reshape(-1, 2, stride)[:, ::-1, :].reshape(-1).copy()


def get_bit(t: np.ndarray, x: int) -> int:
    return int((int(t[x >> 6]) >> (x & 63)) & 1)


def set_positions(t: np.ndarray) -> np.ndarray:
    """Sorted assignment indices whose bit is set."""
    nz = np.nonzero(t)[0]
    if nz.size == 0:
        return np.zeros(0, dtype=np.int64)
    bits = np.unpackbits(t[nz].view(np.uint8), bitorder="little").reshape(-1, 64)
    rows, cols = np.nonzero(bits)
    return nz[rows].astype(np.int64) * 64 + cols


def popcount(t: np.ndarray) -> int:
    return int(np.bitwise_count(t).sum())


def from_bools(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=bool)
    size = values.size
    if size < 64:
        values = np.concatenate([values, np.zeros(64 - size, dtype=bool)])
    return np.packbits(values, bitorder="little").view(np.uint64).copy()


def to_bools(t: np.ndarray, n: int) -> np.ndarray:
    bits = np.unpackbits(t.view(np.uint8), bitorder="little").astype(bool)
    return bits[: 1 << n]


def to_hex(t: np.ndarray, n: int) -> str:
    raw = t.astype("<u8").tobytes()
    nbytes = max(1, (1 << n) // 8)
    return raw[:nbytes].hex()


def from_hex(s: str, n: int) -> np.ndarray:
    raw = bytes.fromhex(s)
    if len(raw) != max(1, (1 << n) // 8):
        raise ValueError(f"table_hex has {len(raw)} bytes, expected {max(1, (1 << n) // 8)}")
    raw = raw + bytes(8 * n_words(n) - len(raw))
    t = np.frombuffer(raw, dtype="<u8").astype(np.uint64)
    if n < 6 and int(t[0]) >> (1 << n):
        raise ValueError("bits set beyond 2**n assignments")
    return t
