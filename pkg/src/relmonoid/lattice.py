"""Finite distributive lattices, lattice-valued correspondences, and the
idempotent localization that carves a copy of B_4 out of them.

A lattice is held as explicit meet and join tables over element ids
``0..size-1``.  A correspondence on an ``n``-set is an ``n x n`` array of ids;
the product is ``(RS)(x, z) = join over y of meet(R(x, y), S(y, z))``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .boolrel import Relation

MAX_LATTICE_SIZE = 64
MAX_CORR_N = 6
LOCAL_SIZE = 4


class LatticeError(ValueError):
    """A table pair failed a lattice axiom; ``witness`` names the elements."""

    def __init__(self, axiom: str, witness: tuple[int, ...] = (), detail: str = ""):
        self.axiom = axiom
        self.witness = witness
        msg = f"{axiom} fails"
        if witness:
            msg += " at " + ", ".join(map(str, witness))
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class LocalizationError(RuntimeError):
    """A localized element broke the structure the construction guarantees."""


@dataclass(frozen=True, eq=False)
class Lattice:
    size: int
    meet: np.ndarray
    join: np.ndarray
    name: str = ""

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Lattice):
            return NotImplemented
        return np.array_equal(self.meet, other.meet) and np.array_equal(self.join, other.join)

    def __hash__(self) -> int:
        return hash((self.size, self.meet.tobytes(), self.join.tobytes()))

    @property
    def nontrivial(self) -> bool:
        return self.size >= 2

    def leq(self, a: int, b: int) -> bool:
        return int(self.meet[a, b]) == a

    def to_text(self) -> str:
        lines = [str(self.size)]
        lines += [" ".join(map(str, row)) for row in self.meet.tolist()]
        lines += [" ".join(map(str, row)) for row in self.join.tolist()]
        return "\n".join(lines) + "\n"


def _first(mask: np.ndarray) -> tuple[int, ...] | None:
    hits = np.argwhere(mask)
    return tuple(int(v) for v in hits[0]) if hits.size else None


def verify_lattice(meet: Sequence[Sequence[int]] | np.ndarray,
                   join: Sequence[Sequence[int]] | np.ndarray,
                   name: str = "") -> Lattice:
    """Validate a pair of tables as a distributive lattice.

    Raises :class:`LatticeError` naming the first violated axiom and the
    element tuple witnessing it.
    """
    meet = np.array(meet, dtype=np.int64)
    join = np.array(join, dtype=np.int64)
    if meet.ndim != 2 or meet.shape[0] != meet.shape[1] or meet.shape != join.shape:
        raise LatticeError("shape", detail=f"meet {meet.shape}, join {join.shape}")
    m = meet.shape[0]
    if not 1 <= m <= MAX_LATTICE_SIZE:
        raise LatticeError("size", detail=f"{m} not in 1..{MAX_LATTICE_SIZE}")
    for label, t in (("meet", meet), ("join", join)):
        bad = _first((t < 0) | (t >= m))
        if bad is not None:
            raise LatticeError(f"{label} range", bad)

    idx = np.arange(m)
    a = idx[:, None, None]
    b = idx[None, :, None]
    c = idx[None, None, :]
    checks = [
        ("meet commutativity", meet != meet.T),
        ("join commutativity", join != join.T),
        ("meet idempotency", meet[idx, idx] != idx),
        ("join idempotency", join[idx, idx] != idx),
        ("meet associativity", meet[meet[a, b], c] != meet[a, meet[b, c]]),
        ("join associativity", join[join[a, b], c] != join[a, join[b, c]]),
        ("absorption (meet over join)", meet[idx[:, None], join] != idx[:, None]),
        ("absorption (join over meet)", join[idx[:, None], meet] != idx[:, None]),
        ("distributivity", meet[a, join[b, c]] != join[meet[a, b], meet[a, c]]),
    ]
    for axiom, failed in checks:
        bad = _first(failed)
        if bad is not None:
            raise LatticeError(axiom, bad)
    meet.setflags(write=False)
    join.setflags(write=False)
    return Lattice(m, meet, join, name)


def build_chain(k: int) -> Lattice:
    if k < 1:
        raise ValueError("a chain needs at least one element")
    idx = np.arange(k)
    return verify_lattice(np.minimum.outer(idx, idx), np.maximum.outer(idx, idx), f"chain{k}")


def build_boolean(k: int) -> Lattice:
    """Subsets of a ``k``-set; element id is the subset bitmask."""
    if not 0 <= k <= 4:
        raise ValueError("boolean lattices are limited to k <= 4")
    idx = np.arange(1 << k)
    return verify_lattice(np.bitwise_and.outer(idx, idx), np.bitwise_or.outer(idx, idx), f"boolean{k}")


def _transitive_closure(k: int, edges: Iterable[tuple[int, int]]) -> np.ndarray:
    less = np.zeros((k, k), dtype=bool)
    for i, j in edges:
        if not (0 <= i < k and 0 <= j < k):
            raise ValueError(f"edge {(i, j)} out of range for {k} points")
        less[i, j] = True
    for mid in range(k):
        less |= less[:, mid, None] & less[None, mid, :]
    if less.diagonal().any():
        point = int(np.flatnonzero(less.diagonal())[0])
        raise ValueError(f"poset relation has a cycle through point {point}")
    return less


def build_downsets(k: int, edges: Iterable[tuple[int, int]], name: str = "") -> Lattice:
    """Lattice of down-closed subsets of the poset on ``k`` points where each
    edge ``(i, j)`` means ``i < j``.  Ids follow ascending subset bitmask."""
    less = _transitive_closure(k, edges)
    below = [sum(1 << i for i in range(k) if less[i, j]) for j in range(k)]
    downsets = [
        s for s in range(1 << k)
        if all(not (s >> j & 1) or (below[j] & ~s) == 0 for j in range(k))
    ]
    if len(downsets) > MAX_LATTICE_SIZE:
        raise ValueError(f"{len(downsets)} downsets exceed the {MAX_LATTICE_SIZE}-element limit")
    pos = {s: i for i, s in enumerate(downsets)}
    meet = [[pos[s & t] for t in downsets] for s in downsets]
    join = [[pos[s | t] for t in downsets] for s in downsets]
    return verify_lattice(meet, join, name or f"downsets{k}")


def m3_tables() -> tuple[list[list[int]], list[list[int]]]:
    """The diamond: bottom 0, atoms 1..3, top 4."""
    return _bounded_tables(5, below=set())


def n5_tables() -> tuple[list[list[int]], list[list[int]]]:
    """The pentagon: 0 < 1 < 2 < 4 and 0 < 3 < 4."""
    return _bounded_tables(5, below={(1, 2)})


def _bounded_tables(m: int, below: set) -> tuple[list[list[int]], list[list[int]]]:
    top = m - 1
    leq = {(a, a) for a in range(m)} | {(0, a) for a in range(m)} | {(a, top) for a in range(m)} | below

    def lower_bounds(a, b):
        return [z for z in range(m) if (z, a) in leq and (z, b) in leq]

    def upper_bounds(a, b):
        return [z for z in range(m) if (a, z) in leq and (b, z) in leq]

    meet = [[max(lower_bounds(a, b), key=lambda z: sum((w, z) in leq for w in range(m))) for b in range(m)]
            for a in range(m)]
    join = [[min(upper_bounds(a, b), key=lambda z: sum((w, z) in leq for w in range(m))) for b in range(m)]
            for a in range(m)]
    return meet, join


BUILTIN_NAMES = tuple(f"chain{k}" for k in range(1, 9)) + tuple(f"boolean{k}" for k in range(1, 5))


def builtin(name: str) -> Lattice:
    if name not in BUILTIN_NAMES:
        raise ValueError(f"unknown lattice {name!r}; builtins: {', '.join(BUILTIN_NAMES)}")
    if name.startswith("chain"):
        return build_chain(int(name[5:]))
    return build_boolean(int(name[7:]))


def _int_lines(text: str) -> list[list[int]]:
    return [[int(tok) for tok in line.split()] for line in text.splitlines() if line.strip()]


def parse_lattice(text: str, name: str = "") -> Lattice:
    lines = _int_lines(text)
    if not lines or len(lines[0]) != 1:
        raise LatticeError("format", detail="first line must hold the element count")
    m = lines[0][0]
    if len(lines) != 2 * m + 1:
        raise LatticeError("format", detail=f"expected {2 * m} table rows, got {len(lines) - 1}")
    return verify_lattice(lines[1:m + 1], lines[m + 1:], name)


def parse_poset(text: str) -> tuple[int, list[tuple[int, int]]]:
    lines = _int_lines(text)
    if not lines or len(lines[0]) != 1:
        raise ValueError("first poset line must hold the point count")
    edges = []
    for line in lines[1:]:
        if len(line) != 2:
            raise ValueError(f"poset line {line!r} must be 'i j'")
        edges.append((line[0], line[1]))
    return lines[0][0], edges


def load_lattice(source: str) -> Lattice:
    """A builtin name, or a path to a lattice table file."""
    if source in BUILTIN_NAMES:
        return builtin(source)
    path = Path(source)
    return parse_lattice(path.read_text(), path.stem)


def bottom(l: Lattice) -> int:
    return reduce(lambda a, b: int(l.meet[a, b]), range(l.size))


def top(l: Lattice) -> int:
    return reduce(lambda a, b: int(l.join[a, b]), range(l.size))


def atoms(l: Lattice) -> list[int]:
    """Elements covering the bottom, ascending by id."""
    z = bottom(l)
    above = [a for a in range(l.size) if a != z]
    return [c for c in above if not any(b != c and l.leq(b, c) for b in above)]


# ---------------------------------------------------------------------------
# Correspondences


@dataclass(frozen=True, eq=False)
class Correspondence:
    lattice: Lattice
    cells: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        cells = np.array(self.cells, dtype=np.int64)
        n = cells.shape[0]
        if cells.shape != (n, n) or not 1 <= n <= MAX_CORR_N:
            raise ValueError(f"cells must be square with side in 1..{MAX_CORR_N}, got {cells.shape}")
        if cells.min() < 0 or cells.max() >= self.lattice.size:
            raise ValueError("cell ids out of range for the lattice")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def n(self) -> int:
        return self.cells.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Correspondence):
            return NotImplemented
        return self.lattice == other.lattice and np.array_equal(self.cells, other.cells)

    def __hash__(self) -> int:
        return hash(self.cells.tobytes())

    def __getitem__(self, xy: tuple[int, int]) -> int:
        return int(self.cells[xy])

    def __matmul__(self, other: Correspondence) -> Correspondence:
        return compose_corr(self, other)

    def to_text(self) -> str:
        return f"{self.n}:" + ",".join(map(str, self.cells.ravel().tolist()))

    @classmethod
    def from_text(cls, lattice: Lattice, text: str) -> Correspondence:
        n_text, _, body = text.strip().partition(":")
        n = int(n_text)
        ids = [int(t) for t in body.split(",")] if body else []
        if len(ids) != n * n:
            raise ValueError(f"expected {n * n} cells, got {len(ids)}")
        return cls(lattice, np.array(ids).reshape(n, n))

    @classmethod
    def constant(cls, lattice: Lattice, n: int, value: int) -> Correspondence:
        return cls(lattice, np.full((n, n), value))

    @classmethod
    def identity(cls, lattice: Lattice, n: int) -> Correspondence:
        cells = np.full((n, n), bottom(lattice))
        np.fill_diagonal(cells, top(lattice))
        return cls(lattice, cells)


def compose_corr_many(l: Lattice, left: np.ndarray, right: np.ndarray, chunk: int = 8192) -> np.ndarray:
    """Batched products of ``(B, n, n)`` id arrays."""
    left = np.asarray(left)
    right = np.asarray(right)
    if left.shape != right.shape or left.ndim != 3 or left.shape[1] != left.shape[2]:
        raise ValueError(f"shape mismatch: {left.shape} vs {right.shape}")
    n = left.shape[1]
    out = np.empty(left.shape, dtype=np.int64)
    for start in range(0, left.shape[0], chunk):
        r = left[start:start + chunk]
        s = right[start:start + chunk]
        # meets[b, x, y, z] = R(x, y) ^ S(y, z)
        meets = l.meet[r[:, :, :, None], s[:, None, :, :]]
        acc = meets[:, :, 0, :]
        for y in range(1, n):
            acc = l.join[acc, meets[:, :, y, :]]
        out[start:start + chunk] = acc
    return out


def compose_corr(r: Correspondence, s: Correspondence) -> Correspondence:
    if r.lattice != s.lattice:
        raise ValueError("correspondences over different lattices")
    if r.n != s.n:
        raise ValueError(f"size mismatch: {r.n} vs {s.n}")
    return Correspondence(r.lattice, compose_corr_many(r.lattice, r.cells[None], s.cells[None])[0])


def random_cells(l: Lattice, n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, l.size, size=(count, n, n))


# ---------------------------------------------------------------------------
# Localization at e_{Y,c}


@dataclass(frozen=True, eq=False)
class Localizer:
    lattice: Lattice
    n: int
    Y: tuple[int, ...]
    c: int
    e: Correspondence
    bottom: int

    def describe(self) -> list[tuple[str, str]]:
        """Key/value lines for reports; points of Y are printed 1-based."""
        return [
            ("lattice", self.lattice.name or "custom"),
            ("lattice_size", str(self.lattice.size)),
            ("n", str(self.n)),
            ("Y", ",".join(str(y + 1) for y in self.Y)),
            ("bottom", str(self.bottom)),
            ("atom", str(self.c)),
            ("e", self.e.to_text()),
        ]


def make_localizer(l: Lattice, n: int, Y: Sequence[int] | None = None, c: int | None = None) -> Localizer:
    """Build the idempotent with ``c`` on the diagonal over ``Y`` and the
    bottom everywhere else.  ``Y`` is 0-based and defaults to the first four
    points; ``c`` defaults to the atom with the smallest id."""
    if not l.nontrivial:
        raise ValueError("nontrivial lattice required (size >= 2)")
    if not LOCAL_SIZE <= n <= MAX_CORR_N:
        raise ValueError(f"n must be in {LOCAL_SIZE}..{MAX_CORR_N}, got {n}")
    Y = tuple(range(LOCAL_SIZE)) if Y is None else tuple(sorted(Y))
    if len(set(Y)) != LOCAL_SIZE or len(Y) != LOCAL_SIZE:
        raise ValueError(f"Y must have exactly {LOCAL_SIZE} distinct points, got {Y}")
    if not all(0 <= y < n for y in Y):
        raise ValueError(f"Y = {Y} is not a subset of the {n}-point set")
    candidates = atoms(l)
    if c is None:
        c = candidates[0]
    elif c not in candidates:
        raise ValueError(f"element {c} does not cover the bottom; atoms are {candidates}")
    z = bottom(l)
    cells = np.full((n, n), z)
    for y in Y:
        cells[y, y] = c
    e = Correspondence(l, cells)
    if compose_corr(e, e) != e:
        raise LocalizationError("e_{Y,c} is not idempotent")
    return Localizer(l, n, Y, c, e, z)


def localize_many(loc: Localizer, cells: np.ndarray) -> np.ndarray:
    """``e a e`` for each ``a`` in a ``(B, n, n)`` batch."""
    e = np.broadcast_to(loc.e.cells, cells.shape)
    l = loc.lattice
    return compose_corr_many(l, compose_corr_many(l, e, cells), e)


def _check_structure(loc: Localizer, beta: np.ndarray) -> None:
    outside = np.ones(loc.n, dtype=bool)
    outside[list(loc.Y)] = False
    off = np.concatenate([beta[:, outside, :].ravel(), beta[:, :, outside].ravel()])
    if np.any(off != loc.bottom):
        raise LocalizationError("localized element is not bottom outside Y x Y")
    inner = beta[:, list(loc.Y)][:, :, list(loc.Y)]
    if np.any((inner != loc.bottom) & (inner != loc.c)):
        raise LocalizationError("localized element takes a value other than bottom or the atom on Y x Y")


def project_many(loc: Localizer, cells: np.ndarray, localized: bool = False) -> np.ndarray:
    """Bit vectors over Y of ``e a e`` for each ``a``; ``localized=True``
    skips the multiplication when the inputs are already of that form."""
    beta = np.asarray(cells) if localized else localize_many(loc, np.asarray(cells))
    _check_structure(loc, beta)
    inner = beta[:, list(loc.Y)][:, :, list(loc.Y)] == loc.c
    weights = 1 << np.arange(LOCAL_SIZE * LOCAL_SIZE, dtype=np.int64)
    return inner.reshape(len(beta), -1).astype(np.int64) @ weights


def project(loc: Localizer, alpha: Correspondence) -> Relation:
    if alpha.lattice != loc.lattice or alpha.n != loc.n:
        raise ValueError("correspondence does not live in the localizer's monoid")
    return Relation(LOCAL_SIZE, int(project_many(loc, alpha.cells[None])[0]))


def lift_many(loc: Localizer, bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    out = np.full((bits.size, loc.n, loc.n), loc.bottom, dtype=np.int64)
    for k, (x, y) in enumerate(itertools.product(loc.Y, loc.Y)):
        out[:, x, y] = np.where((bits >> k) & 1, loc.c, loc.bottom)
    return out


def lift(loc: Localizer, b: Relation) -> Correspondence:
    if b.n != LOCAL_SIZE:
        raise ValueError(f"expected a relation on {LOCAL_SIZE} points, got n={b.n}")
    return Correspondence(loc.lattice, lift_many(loc, np.array([b.bits]))[0])


def atom_meet_law(l: Lattice, c: int) -> tuple[int, int] | None:
    """First ``(c, a)`` with ``meet(c, a)`` outside ``{bottom, c}``, else ``None``."""
    z = bottom(l)
    for a in range(l.size):
        if int(l.meet[c, a]) not in (z, c):
            return c, a
    return None
