"""Binary relations on an n-element set, stored as row-major bit vectors.

Bit ``i*n + j`` of a relation is set iff ``(i, j)`` belongs to it.  Points are
numbered from 0 internally.  The serialized form is ``"n:<hex>"`` with the hex
digits zero-padded to ``ceil(n*n/4)`` characters, so the 4x4 identity is
``"4:8421"``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

MAX_N = 8
MAX_ENUM_N = 4


def _check_n(n: int, limit: int = MAX_N) -> None:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= limit:
        raise ValueError(f"set size must be an integer in 1..{limit}, got {n!r}")


def _row_mask(n: int) -> int:
    return (1 << n) - 1


@dataclass(frozen=True, slots=True)
class Relation:
    """A relation on ``{0, ..., n-1}``; an element of the monoid B_n."""

    n: int
    bits: int

    def __post_init__(self) -> None:
        _check_n(self.n)
        if not 0 <= self.bits < (1 << (self.n * self.n)):
            raise ValueError(f"bits {self.bits:#x} out of range for n={self.n}")

    @classmethod
    def identity(cls, n: int) -> Relation:
        return cls(n, sum(1 << (i * n + i) for i in range(n)))

    @classmethod
    def zero(cls, n: int) -> Relation:
        return cls(n, 0)

    @classmethod
    def full(cls, n: int) -> Relation:
        return cls(n, (1 << (n * n)) - 1)

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> Relation:
        bits = 0
        for i, j in pairs:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"pair {(i, j)} out of range for n={n}")
            bits |= 1 << (i * n + j)
        return cls(n, bits)

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[int]] | np.ndarray) -> Relation:
        m = np.asarray(matrix, dtype=bool)
        n = m.shape[0]
        if m.shape != (n, n):
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        return cls.from_pairs(n, zip(*np.nonzero(m)))

    @classmethod
    def permutation(cls, perm: Sequence[int]) -> Relation:
        """The relation ``{(i, perm[i])}``; ``perm`` must be a bijection."""
        n = len(perm)
        if sorted(perm) != list(range(n)):
            raise ValueError(f"not a permutation: {perm!r}")
        return cls.from_pairs(n, enumerate(perm))

    @classmethod
    def from_hex(cls, text: str) -> Relation:
        n_text, _, digits = text.strip().partition(":")
        if not digits:
            raise ValueError(f"malformed relation {text!r}; expected 'n:hex'")
        return cls(int(n_text), int(digits, 16))

    def to_hex(self) -> str:
        width = -(-self.n * self.n // 4)
        return f"{self.n}:{self.bits:0{width}x}"

    def __str__(self) -> str:
        return self.to_hex()

    def __contains__(self, pair: tuple[int, int]) -> bool:
        i, j = pair
        return bool((self.bits >> (i * self.n + j)) & 1)

    def __matmul__(self, other: Relation) -> Relation:
        return compose(self, other)

    def rows(self) -> tuple[int, ...]:
        """Row bitmasks; bit ``j`` of row ``i`` is the entry ``(i, j)``."""
        m = _row_mask(self.n)
        return tuple((self.bits >> (i * self.n)) & m for i in range(self.n))

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in range(self.n) if (i, j) in self]

    def to_matrix(self) -> np.ndarray:
        return np.array(
            [[(i, j) in self for j in range(self.n)] for i in range(self.n)], dtype=bool
        )

    def transpose(self) -> Relation:
        return Relation.from_pairs(self.n, ((j, i) for i, j in self.pairs()))


def or_table(s: Relation) -> tuple[int, ...]:
    """``table[mask]`` is the OR of the rows of ``s`` selected by ``mask``."""
    rows = s.rows()
    table = [0] * (1 << s.n)
    for mask in range(1, 1 << s.n):
        low = (mask & -mask).bit_length() - 1
        table[mask] = table[mask & (mask - 1)] | rows[low]
    return tuple(table)


def compose_with_table(r: Relation, table: Sequence[int]) -> Relation:
    """Product ``r s`` given ``or_table(s)``: one lookup per row of ``r``."""
    n = r.n
    if len(table) != 1 << n:
        raise ValueError("table size does not match relation size")
    m = _row_mask(n)
    bits = 0
    for i in range(n):
        bits |= table[(r.bits >> (i * n)) & m] << (i * n)
    return Relation(n, bits)


def compose(r: Relation, s: Relation) -> Relation:
    """Relational product: ``(i, k)`` is in ``r s`` iff some ``j`` has
    ``(i, j)`` in ``r`` and ``(j, k)`` in ``s``."""
    if r.n != s.n:
        raise ValueError(f"size mismatch: {r.n} vs {s.n}")
    return compose_with_table(r, or_table(s))


def is_unit(r: Relation) -> bool:
    """Units of B_n are exactly the permutation relations."""
    rows = r.rows()
    if any(row == 0 or row & (row - 1) for row in rows):
        return False
    return len(set(rows)) == r.n


def units(n: int) -> list[Relation]:
    _check_n(n)
    return [Relation.permutation(p) for p in itertools.permutations(range(n))]


def all_relations(n: int) -> Iterator[Relation]:
    """Every element of B_n in ascending bit-vector order (n <= 4)."""
    _check_n(n, MAX_ENUM_N)
    for bits in range(1 << (n * n)):
        yield Relation(n, bits)


# ---------------------------------------------------------------------------
# Vectorized kernels over integer arrays of bit vectors.


def rows_of(n: int, bits: np.ndarray) -> np.ndarray:
    """Row masks of each relation in ``bits``; shape ``(n, len(bits))``."""
    bits = np.asarray(bits, dtype=np.uint64)
    m = np.uint64(_row_mask(n))
    return np.stack([(bits >> np.uint64(i * n)) & m for i in range(n)])


def or_tables(n: int, bits: np.ndarray) -> np.ndarray:
    """Row-OR tables for many right operands; shape ``(2**n, len(bits))``."""
    rows = rows_of(n, bits)
    table = np.zeros((1 << n, rows.shape[1]), dtype=np.uint64)
    for mask in range(1, 1 << n):
        low = (mask & -mask).bit_length() - 1
        table[mask] = table[mask & (mask - 1)] | rows[low]
    return table


def compose_many(n: int, left: np.ndarray, right: np.ndarray, chunk: int = 1 << 14) -> np.ndarray:
    """Elementwise products ``left[k] right[k]`` of two equal-length arrays."""
    _check_n(n)
    left = np.asarray(left, dtype=np.uint64)
    right = np.asarray(right, dtype=np.uint64)
    if left.shape != right.shape or left.ndim != 1:
        raise ValueError("left and right must be 1-d arrays of equal length")
    out = np.zeros(left.shape, dtype=np.uint64)
    m = np.uint64(_row_mask(n))
    for start in range(0, left.size, chunk):
        sl = slice(start, start + chunk)
        table = or_tables(n, right[sl])
        cols = np.arange(table.shape[1])
        acc = np.zeros(table.shape[1], dtype=np.uint64)
        for i in range(n):
            row = ((left[sl] >> np.uint64(i * n)) & m).astype(np.intp)
            acc |= table[row, cols] << np.uint64(i * n)
        out[sl] = acc
    return out


def is_unit_many(n: int, bits: np.ndarray) -> np.ndarray:
    rows = rows_of(n, bits)
    single = np.all((rows != 0) & ((rows & (rows - np.uint64(1))) == 0), axis=0)
    covered = np.bitwise_or.reduce(rows, axis=0) == np.uint64(_row_mask(n))
    return single & covered


class ProductKernel:
    """Products of one left operand against a fixed array of right operands.

    Holds the row-OR table of every right operand, pre-shifted into each row
    position, so a left operand's products cost ``n`` gathers and ``n - 1``
    ORs over the right-operand axis.
    """

    def __init__(self, n: int, right: np.ndarray | None = None):
        _check_n(n, MAX_ENUM_N)
        self.n = n
        if right is None:
            right = np.arange(1 << (n * n))
        self.right = np.asarray(right, dtype=np.int64)
        table = or_tables(n, self.right).astype(np.uint16)
        self._shifted = [table << np.uint16(i * n) for i in range(n)]
        self._mask = _row_mask(n)

    def left_products(self, a: int) -> np.ndarray:
        """``a * right[k]`` for every k, as a uint16 array."""
        n, m = self.n, self._mask
        out = self._shifted[0][a & m].copy()
        for i in range(1, n):
            out |= self._shifted[i][(a >> (i * n)) & m]
        return out


@lru_cache(maxsize=None)
def unit_bits(n: int) -> tuple[int, ...]:
    return tuple(sorted(u.bits for u in units(n)))


@lru_cache(maxsize=None)
def unit_mask(n: int) -> np.ndarray:
    """Boolean array over all of B_n marking the units (n <= 4)."""
    _check_n(n, MAX_ENUM_N)
    mask = np.zeros(1 << (n * n), dtype=bool)
    mask[list(unit_bits(n))] = True
    mask.setflags(write=False)
    return mask
