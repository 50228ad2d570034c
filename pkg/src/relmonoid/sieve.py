"""Unit / reducible / irreducible classification of B_n and associate classes.

Two elements are associates when one is ``u r v`` for units ``u, v``.  In B_n
the units are the permutation relations, so the associate class of ``r`` is
its orbit under independent row and column permutations.  The canonical form
of ``r`` is the smallest bit vector in that orbit.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from multiprocessing import get_context
from typing import Callable, Iterable, Sequence, TextIO

import numpy as np

from .boolrel import MAX_ENUM_N, ProductKernel, Relation, compose_many, unit_mask

log = logging.getLogger(__name__)

MODES = ("full", "reduced")


def _check_enum_n(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_ENUM_N:
        raise ValueError(f"full-monoid enumeration needs 1 <= n <= {MAX_ENUM_N}, got {n!r}")


@dataclass(frozen=True)
class AssociateAction:
    """The map ``r -> u r v`` for ``u = permutation(left)``, ``v = permutation(right)``."""

    left: tuple[int, ...]
    right: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.left)
        if sorted(self.left) != list(range(n)) or sorted(self.right) != list(range(n)):
            raise ValueError("both halves of an action must be permutations of the same size")

    def apply(self, r: Relation) -> Relation:
        if r.n != len(self.left):
            raise ValueError("action and relation sizes differ")
        # (u r v)(i, l) = r(left[i], k) with right[k] = l
        return Relation.from_pairs(
            r.n, ((i, self.right[k]) for i in range(r.n) for k in range(r.n) if (self.left[i], k) in r)
        )

    def units(self) -> tuple[Relation, Relation]:
        return Relation.permutation(self.left), Relation.permutation(self.right)


@lru_cache(maxsize=None)
def _action_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row sources ``(A, n)`` and column relabelling tables ``(A, 2**n)`` for
    all ``(n!)**2`` actions, in ``itertools.product(perms, perms)`` order."""
    perms = list(itertools.permutations(range(n)))
    colmaps = np.zeros((len(perms), 1 << n), dtype=np.int64)
    for p, perm in enumerate(perms):
        for mask in range(1 << n):
            colmaps[p, mask] = sum(1 << perm[k] for k in range(n) if mask >> k & 1)
    left = np.array([lp for lp, _ in itertools.product(perms, perms)], dtype=np.intp)
    right = np.array([rp for _, rp in itertools.product(range(len(perms)), range(len(perms)))])
    return left, colmaps[right]


def orbit(r: Relation) -> np.ndarray:
    """Images of ``r`` under every action (with repetition), as bit vectors."""
    _check_enum_n(r.n)
    left, colmaps = _action_tables(r.n)
    rows = np.array(r.rows(), dtype=np.intp)
    acts = np.arange(len(left))
    out = np.zeros(len(left), dtype=np.int64)
    for i in range(r.n):
        out |= colmaps[acts, rows[left[:, i]]] << (i * r.n)
    return out


def canonical(r: Relation) -> Relation:
    return Relation(r.n, int(orbit(r).min()))


def are_associates(r: Relation, s: Relation) -> bool:
    if r.n != s.n:
        raise ValueError(f"size mismatch: {r.n} vs {s.n}")
    return canonical(r) == canonical(s)


@lru_cache(maxsize=None)
def canonical_table(n: int) -> np.ndarray:
    """Canonical form of every element of B_n, indexed by bit vector."""
    _check_enum_n(n)
    size = 1 << (n * n)
    left, colmaps = _action_tables(n)
    elems = np.arange(size, dtype=np.int64)
    rows = [(elems >> (i * n)) & ((1 << n) - 1) for i in range(n)]
    best = elems.copy()
    for a in range(len(left)):
        img = colmaps[a][rows[left[a, 0]]]
        for i in range(1, n):
            img |= colmaps[a][rows[left[a, i]]] << (i * n)
        np.minimum(best, img, out=best)
    best.setflags(write=False)
    return best


class Status(IntEnum):
    UNIT = 0
    REDUCIBLE = 1
    IRREDUCIBLE = 2


@dataclass(frozen=True, eq=False)
class Classification:
    """Status of every element of B_n.

    ``products`` marks the elements that arise as a product of two non-units,
    exactly as collected by the sieve; ``status`` is derived from it, and the
    two are kept separately so consumers can cross-check them.
    """

    n: int
    status: np.ndarray
    canonical: np.ndarray
    products: np.ndarray
    class_reps: tuple[int, ...]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Classification):
            return NotImplemented
        return (
            self.n == other.n
            and self.class_reps == other.class_reps
            and np.array_equal(self.status, other.status)
            and np.array_equal(self.canonical, other.canonical)
            and np.array_equal(self.products, other.products)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.status.tobytes(), self.class_reps))

    def status_of(self, r: Relation) -> Status:
        return Status(int(self.status[r.bits]))

    def counts(self) -> dict[Status, int]:
        tally = np.bincount(self.status, minlength=len(Status))
        return {s: int(tally[s]) for s in Status}

    @property
    def representatives(self) -> list[Relation]:
        return [Relation(self.n, b) for b in self.class_reps]

    def class_sizes(self) -> dict[int, int]:
        irr = self.status == Status.IRREDUCIBLE
        reps, sizes = np.unique(self.canonical[irr], return_counts=True)
        return {int(r): int(s) for r, s in zip(reps, sizes)}

    def with_status(self, bits: int, status: Status) -> Classification:
        """Copy with one element relabelled; used to build corrupted inputs."""
        new = self.status.copy()
        new[bits] = status
        new.setflags(write=False)
        return Classification(self.n, new, self.canonical, self.products, self.class_reps)

    def write_csv(self, stream: TextIO) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["relation", "status", "canonical"])
        for bits in range(self.status.size):
            writer.writerow(
                [
                    Relation(self.n, bits).to_hex(),
                    Status(int(self.status[bits])).name.lower(),
                    Relation(self.n, int(self.canonical[bits])).to_hex(),
                ]
            )

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    @classmethod
    def read_csv(cls, stream: TextIO) -> Classification:
        reader = csv.reader(stream)
        header = next(reader)
        if header != ["relation", "status", "canonical"]:
            raise ValueError(f"unexpected header {header!r}")
        entries = [(Relation.from_hex(r), Status[s.upper()], Relation.from_hex(c)) for r, s, c in reader]
        if not entries:
            raise ValueError("empty classification")
        n = entries[0][0].n
        size = 1 << (n * n)
        if [e[0].bits for e in entries] != list(range(size)):
            raise ValueError("classification rows must list every relation in ascending order")
        status = np.array([e[1] for e in entries], dtype=np.uint8)
        canon = np.array([e[2].bits for e in entries], dtype=np.int64)
        return _finish(n, status == Status.REDUCIBLE, status, canon)


def _finish(n: int, products: np.ndarray, status: np.ndarray, canon: np.ndarray) -> Classification:
    reps = tuple(int(b) for b in np.unique(canon[status == Status.IRREDUCIBLE]))
    for arr in (products, status, canon):
        arr.setflags(write=False)
    return Classification(n, status, canon, products, reps)


# ---------------------------------------------------------------------------
# The sieve


def _mark_products(n: int, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Mark every product ``a b`` with ``a`` in ``left`` and ``b`` in ``right``."""
    kernel = ProductKernel(n, right)
    mark = np.zeros(1 << (n * n), dtype=bool)
    for a in left.tolist():
        prods = kernel.left_products(a)
        fresh = prods[~mark[prods]]
        if fresh.size:
            mark[fresh] = True
    return mark


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1


def run_chunks(
    fn: Callable[..., np.ndarray],
    chunks: Sequence[np.ndarray],
    args: tuple,
    workers: int | None,
) -> list[np.ndarray]:
    """Apply ``fn(*args, chunk)`` to each chunk, in order, possibly in worker
    processes.  Results come back in chunk order regardless of ``workers``."""
    workers = default_workers() if workers is None else workers
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or len(chunks) == 1:
        return [fn(*args, c) for c in chunks]
    with ProcessPoolExecutor(workers, mp_context=get_context("fork")) as pool:
        futures = [pool.submit(fn, *args, c) for c in chunks]
        return [f.result() for f in futures]


def split(items: np.ndarray, workers: int | None) -> list[np.ndarray]:
    workers = default_workers() if workers is None else workers
    parts = max(1, min(len(items), 4 * workers)) if workers > 1 else 1
    return [c for c in np.array_split(items, parts) if c.size]


def classify_all(n: int, mode: str = "reduced", workers: int | None = None) -> Classification:
    """Sieve B_n for products of two non-units.

    ``mode="full"`` runs the outer loop over every non-unit; ``"reduced"``
    only over canonical representatives and then closes the marks under the
    associate action.  Both yield the same classification.
    """
    _check_enum_n(n)
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    size = 1 << (n * n)
    is_unit = unit_mask(n)
    canon = canonical_table(n).copy()
    nonunits = np.flatnonzero(~is_unit)
    if mode == "full":
        left = nonunits
    else:
        left = np.unique(canon[nonunits])
    log.info("sieve n=%d mode=%s: %d left x %d right operands", n, mode, left.size, nonunits.size)
    marks = run_chunks(_mark_products, split(left, workers), (n, nonunits), workers)
    products = np.logical_or.reduce(marks) if marks else np.zeros(size, dtype=bool)
    if mode == "reduced":
        hit = np.zeros(size, dtype=bool)
        hit[canon[products]] = True
        products = hit[canon]
    if np.any(products & is_unit):
        raise RuntimeError("a product of two non-units is a unit; composition kernel is broken")
    status = np.full(size, Status.IRREDUCIBLE, dtype=np.uint8)
    status[products] = Status.REDUCIBLE
    status[is_unit] = Status.UNIT
    return _finish(n, products, status, canon)


def witness_pair(c: Classification) -> tuple[Relation, Relation] | None:
    """The two smallest canonical irreducibles, or ``None`` with fewer than two classes."""
    if len(c.class_reps) < 2:
        return None
    p, q = c.class_reps[:2]
    return Relation(c.n, p), Relation(c.n, q)


def find_factorization(p: Relation) -> tuple[Relation, Relation] | None:
    """Some ``(a, b)`` of non-units with ``a b = p``, or ``None``.

    Scans every non-unit left factor ``a``.  For fixed ``a`` the largest ``b``
    with ``a b <= p`` has row ``j`` equal to the AND of the rows of ``p``
    indexed by column ``j`` of ``a``; since composition is monotone, some
    ``b`` gives ``a b = p`` iff that largest one does.  When the largest is a
    permutation its sub-relations are searched directly.
    """
    n = p.n
    _check_enum_n(n)
    full_row = (1 << n) - 1
    is_unit = unit_mask(n)
    a_all = np.flatnonzero(~is_unit).astype(np.int64)
    a_rows = [(a_all >> (i * n)) & full_row for i in range(n)]
    p_rows = p.rows()
    bmax = np.zeros_like(a_all)
    for j in range(n):
        row = np.full_like(a_all, full_row)
        for i in range(n):
            uses = ((a_rows[i] >> j) & 1).astype(bool)
            row[uses] &= p_rows[i]
        bmax |= row << (j * n)

    prods = compose_many(n, a_all, bmax).astype(np.int64)
    ok = (prods == p.bits) & ~is_unit[bmax]
    if ok.any():
        k = int(np.flatnonzero(ok)[0])
        return Relation(n, int(a_all[k])), Relation(n, int(bmax[k]))
    for k in np.flatnonzero(is_unit[bmax]).tolist():
        a = Relation(n, int(a_all[k]))
        full = int(bmax[k])
        sub = full
        while sub:
            sub = (sub - 1) & full
            b = Relation(n, sub)
            if (a @ b).bits == p.bits:
                return a, b
    return None


def is_irreducible_direct(p: Relation) -> bool:
    """Irreducibility of ``p`` from scratch, without a classification."""
    return not unit_mask(p.n)[p.bits] and find_factorization(p) is None


def summary_lines(c: Classification) -> list[str]:
    counts = c.counts()
    lines = [
        f"n={c.n}",
        f"elements={c.status.size}",
        f"units={counts[Status.UNIT]}",
        f"reducible={counts[Status.REDUCIBLE]}",
        f"irreducible={counts[Status.IRREDUCIBLE]}",
        f"irreducible_classes={len(c.class_reps)}",
    ]
    for rep, size in c.class_sizes().items():
        lines.append(f"class {Relation(c.n, rep).to_hex()} size={size}")
    pair = witness_pair(c)
    lines.append("witnesses=" + (" ".join(r.to_hex() for r in pair) if pair else "none"))
    return lines


def iter_status(c: Classification, status: Status) -> Iterable[Relation]:
    return (Relation(c.n, int(b)) for b in np.flatnonzero(c.status == status))
