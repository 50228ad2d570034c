"""The map onto {1, x, y, 0} and the certificate built around it.

Given irreducibles ``p`` and ``q`` of B_n lying in different associate
classes, every element is sent to 1 (units), ``x`` (associates of ``p``),
``y`` (associates of ``q``) or 0.  Since ``x*x = x*y = y*y = 0`` in
``k[x, y]/(x^2, y^2, xy)``, this is a monoid homomorphism, and a certificate
records the checks establishing it.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import IntEnum
from multiprocessing import get_context
from typing import Sequence

import numpy as np

from . import lattice as lat
from .boolrel import ProductKernel, Relation, compose_many
from .sieve import (
    Classification,
    Status,
    classify_all,
    default_workers,
    find_factorization,
    orbit,
    split,
    witness_pair,
)

INFINITE = "infinite representation type"
NOT_ESTABLISHED = "hypothesis not established"
HOM_MODES = ("structured", "exhaustive", "both")


class HomImage(IntEnum):
    ONE = 0
    X = 1
    Y = 2
    ZERO = 3

    def __mul__(self, other: HomImage) -> HomImage:
        return target_mul(self, other)

    @property
    def symbol(self) -> str:
        return {0: "1", 1: "x", 2: "y", 3: "0"}[self.value]


# yx = xy lies in the ideal as well, the ring being commutative
MUL_TABLE = np.array(
    [
        [0, 1, 2, 3],
        [1, 3, 3, 3],
        [2, 3, 3, 3],
        [3, 3, 3, 3],
    ],
    dtype=np.uint8,
)
MUL_TABLE.setflags(write=False)


def target_mul(s: HomImage, t: HomImage) -> HomImage:
    return HomImage(int(MUL_TABLE[s, t]))


@dataclass(frozen=True, eq=False)
class HomTable:
    n: int
    image: np.ndarray
    p: int | None = None
    q: int | None = None

    def __getitem__(self, r: Relation) -> HomImage:
        return HomImage(int(self.image[r.bits]))

    def with_image(self, bits: Sequence[int] | int, value: HomImage) -> HomTable:
        """Copy with the given elements remapped; used to build corrupted tables."""
        img = self.image.copy()
        img[np.atleast_1d(bits)] = value
        img.setflags(write=False)
        return HomTable(self.n, img, self.p, self.q)


def build_hom(c: Classification, p: Relation | None = None, q: Relation | None = None) -> HomTable:
    """Tabulate the map for witnesses ``p`` and ``q``.

    Either witness may be omitted, giving the degenerate maps that send the
    missing class nowhere; with neither, only units avoid 0.
    """
    for w in (p, q):
        if w is None:
            continue
        if w.n != c.n:
            raise ValueError(f"witness {w} does not live in B_{c.n}")
        if c.status_of(w) != Status.IRREDUCIBLE:
            raise ValueError(f"witness {w} is {c.status_of(w).name.lower()}, not irreducible")
    if p is not None and q is not None and c.canonical[p.bits] == c.canonical[q.bits]:
        raise ValueError(f"witnesses {p} and {q} are associates; the map would not be well defined")
    image = np.full(c.status.size, HomImage.ZERO, dtype=np.uint8)
    if p is not None:
        image[c.canonical == c.canonical[p.bits]] = HomImage.X
    if q is not None:
        image[c.canonical == c.canonical[q.bits]] = HomImage.Y
    image[c.status == Status.UNIT] = HomImage.ONE
    image.setflags(write=False)
    return HomTable(c.n, image, p.bits if p else None, q.bits if q else None)


@dataclass
class Report:
    """Outcome of one named check."""

    name: str
    mode: str
    passed: bool
    detail: str = ""
    counterexample: tuple | None = None
    elapsed_ms: int = 0

    def line(self, timings: bool = True) -> str:
        ms = self.elapsed_ms if timings else 0
        return f"{self.name} mode={self.mode} result={'pass' if self.passed else 'fail'} elapsed_ms={ms}"


def timed(fn, *args, **kwargs) -> Report:
    start = time.perf_counter()
    report = fn(*args, **kwargs)
    report.elapsed_ms = int(round((time.perf_counter() - start) * 1000))
    return report


def _hom_chunk(n: int, image: np.ndarray, left: np.ndarray) -> tuple[int, int] | None:
    kernel = ProductKernel(n)
    expected = MUL_TABLE[:, image]
    for a in left.tolist():
        bad = image[kernel.left_products(a)] != expected[image[a]]
        if bad.any():
            return a, int(np.flatnonzero(bad)[0])
    return None


def verify_hom_exhaustive(t: HomTable, workers: int | None = None) -> Report:
    """Check ``f(ab) = f(a) f(b)`` over every ordered pair of B_n.

    Chunks of left operands run in order; once a chunk reports a
    counterexample, later chunks are cancelled and the earliest failing
    chunk's first pair is reported, so the result does not depend on
    ``workers``.
    """
    n = t.n
    size = 1 << (n * n)
    chunks = split(np.arange(size), workers)
    workers = default_workers() if workers is None else workers
    found = None
    if workers == 1 or len(chunks) == 1:
        for chunk in chunks:
            found = _hom_chunk(n, t.image, chunk)
            if found:
                break
    else:
        with ProcessPoolExecutor(workers, mp_context=get_context("fork")) as pool:
            futures = [pool.submit(_hom_chunk, n, t.image, c) for c in chunks]
            for k, fut in enumerate(futures):
                found = fut.result()
                if found:
                    for later in futures[k + 1:]:
                        later.cancel()
                    break
    if found is None:
        return Report("hom_exhaustive", "exhaustive", True, f"{size * size} ordered pairs")
    a, b = found
    ra, rb = Relation(n, a), Relation(n, b)
    ab = ra @ rb
    detail = (
        f"f({ra} {rb}) = f({ab}) = {HomImage(int(t.image[ab.bits])).symbol} but "
        f"f({ra}) f({rb}) = {HomImage(int(t.image[a])).symbol}*{HomImage(int(t.image[b])).symbol}"
    )
    return Report("hom_exhaustive", "exhaustive", False, detail, (ra, rb))


def verify_hom_structured(t: HomTable, c: Classification) -> Report:
    """Check the three facts the homomorphism property reduces to:

    (i) exactly the units map to 1 and the map is constant on associate
    classes; (ii) every product of two non-units recorded by the sieve is
    labelled reducible, and every reducible label is backed by such a
    product; (iii) every reducible element maps to 0.

    Given these, a unit factor only moves its partner within an associate
    class, and a product of two non-units lands on 0 while the images of the
    factors lie in the square-zero ideal spanned by x and y.
    """
    name = "hom_structured"
    if t.n != c.n or t.image.shape != c.status.shape:
        return Report(name, "structured", False, "table and classification sizes differ")
    n = c.n
    units = c.status == Status.UNIT
    one = t.image == HomImage.ONE
    bad = np.flatnonzero(units != one)
    if bad.size:
        r = Relation(n, int(bad[0]))
        return Report(name, "structured", False, f"fact i: unit/one mismatch at {r}", (r,))
    bad = np.flatnonzero(t.image != t.image[c.canonical])
    if bad.size:
        r = Relation(n, int(bad[0]))
        rep = Relation(n, int(c.canonical[r.bits]))
        return Report(name, "structured", False, f"fact i: {r} and its associate {rep} map differently", (r, rep))
    reducible = c.status == Status.REDUCIBLE
    bad = np.flatnonzero(c.products != reducible)
    if bad.size:
        r = Relation(n, int(bad[0]))
        what = "a product of non-units labelled " if c.products[r.bits] else "labelled reducible without being a product: "
        label = c.status_of(r).name.lower() if c.products[r.bits] else ""
        return Report(name, "structured", False, f"fact ii: {r} is {what}{label}".rstrip(), (r,))
    bad = np.flatnonzero(reducible & (t.image != HomImage.ZERO))
    if bad.size:
        r = Relation(n, int(bad[0]))
        return Report(name, "structured", False, f"fact iii: reducible {r} maps to {t[r].symbol}", (r,))
    return Report(name, "structured", True, "facts i, ii, iii hold")


def verify_surjective(t: HomTable) -> Report:
    hit = set(np.unique(t.image).tolist())
    missing = [h.symbol for h in HomImage if h not in hit]
    return Report("hom_surjective", "structured", not missing,
                  "all of 1, x, y, 0 attained" if not missing else "missing " + ",".join(missing))


# ---------------------------------------------------------------------------
# Certificates


@dataclass
class Certificate:
    subject: list[tuple[str, str]]
    witnesses: tuple[Relation, Relation] | None
    checks: list[Report]
    localizer: list[tuple[str, str]] | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        ok = self.witnesses is not None and self.checks and all(r.passed for r in self.checks)
        return INFINITE if ok else NOT_ESTABLISHED

    def to_text(self, timings: bool = False) -> str:
        out = ["SUBJECT"]
        out += [f"{k}={v}" for k, v in self.subject]
        out += [f"note={note}" for note in self.notes]
        out += ["", "WITNESSES"]
        if self.witnesses:
            out += [f"p={self.witnesses[0].to_hex()}", f"q={self.witnesses[1].to_hex()}"]
        else:
            out.append("none")
        if self.localizer is not None:
            out += ["", "LOCALIZER"]
            out += [f"{k}={v}" for k, v in self.localizer]
        out += ["", "CHECKS"]
        for r in self.checks:
            out.append(r.line(timings))
            if not r.passed and r.detail:
                out.append(f"  detail: {r.detail}")
        out += ["", "VERDICT", self.verdict]
        return "\n".join(out) + "\n"


def parse_certificate(text: str) -> dict[str, list[str]]:
    """Split a certificate document into its sections' lines."""
    sections: dict[str, list[str]] = {}
    current = None
    for line in text.splitlines():
        if line in ("SUBJECT", "WITNESSES", "LOCALIZER", "CHECKS", "VERDICT"):
            current = line
            sections[current] = []
        elif line and current is not None:
            sections[current].append(line)
    return sections


def _b_n_checks(n: int, mode: str, workers: int | None) -> tuple[tuple[Relation, Relation] | None, list[Report]]:
    """Sieve B_n, pick witnesses, and verify the homomorphism."""
    if mode not in HOM_MODES:
        raise ValueError(f"mode must be one of {HOM_MODES}, got {mode!r}")
    checks = []
    box = {}

    def sieve() -> Report:
        box["c"] = classify_all(n, "reduced", workers)
        return Report("sieve", "exhaustive", True, f"{len(box['c'].class_reps)} irreducible classes")

    checks.append(timed(sieve))
    c = box["c"]
    if mode in ("exhaustive", "both"):
        checks.append(timed(lambda: Report("sieve_modes_agree", "exhaustive",
                                           classify_all(n, "full", workers) == c)))
    pair = witness_pair(c)
    checks.append(Report("witness_pair", "structured", pair is not None,
                         f"{len(c.class_reps)} associate classes of irreducibles"))
    if pair is None:
        return None, checks
    p, q = pair

    def irreducible(label: str, w: Relation) -> Report:
        factor = find_factorization(w)
        return Report(f"witness_{label}_irreducible", "exhaustive", factor is None,
                      "" if factor is None else f"{w} = {factor[0]} {factor[1]}")

    checks.append(timed(irreducible, "p", p))
    checks.append(timed(irreducible, "q", q))
    checks.append(timed(lambda: Report("witness_non_associate", "exhaustive",
                                       q.bits not in set(orbit(p).tolist()))))
    t = build_hom(c, p, q)
    checks.append(timed(verify_hom_structured, t, c))
    if mode in ("exhaustive", "both"):
        checks.append(timed(verify_hom_exhaustive, t, workers))
    checks.append(timed(verify_surjective, t))
    return pair, checks


def certify_relations(n: int, mode: str = "structured", workers: int | None = None) -> Certificate:
    pair, checks = _b_n_checks(n, mode, workers)
    subject = [("monoid", f"B_{n}"), ("description", f"binary relations on a {n}-element set"), ("n", str(n))]
    return Certificate(subject, pair, checks)


def localization_checks(loc: lat.Localizer, seed: int, count: int) -> list[Report]:
    """Idempotency, exhaustive lift/project round trip, and randomized
    homomorphism and bijectivity checks for the localization at ``loc.e``."""
    l = loc.lattice
    rng = np.random.default_rng(seed)
    rand = f"random({seed},{count})"
    checks = []

    def idempotent() -> Report:
        return Report("localizer_idempotent", "exhaustive", lat.compose_corr(loc.e, loc.e) == loc.e)

    def atom_law() -> Report:
        bad = lat.atom_meet_law(l, loc.c)
        return Report("atom_meet_law", "exhaustive", bad is None, "" if bad is None else f"meet{bad}")

    def roundtrip() -> Report:
        every = np.arange(1 << 16)
        lifted = lat.lift_many(loc, every)
        fixed = np.array_equal(lat.localize_many(loc, lifted), lifted)
        back = np.array_equal(lat.project_many(loc, lifted), every)
        return Report("lift_project_roundtrip", "exhaustive", fixed and back,
                      "" if fixed and back else f"fixed={fixed} roundtrip={back}")

    def project_hom() -> Report:
        a = lat.localize_many(loc, lat.random_cells(l, loc.n, count, rng))
        b = lat.localize_many(loc, lat.random_cells(l, loc.n, count, rng))
        lhs = lat.project_many(loc, lat.compose_corr_many(l, a, b))
        rhs = compose_many(4, lat.project_many(loc, a, localized=True),
                           lat.project_many(loc, b, localized=True)).astype(np.int64)
        fails = int(np.count_nonzero(lhs != rhs))
        return Report("project_homomorphism", rand, fails == 0, f"{fails} failures")

    def lift_project() -> Report:
        a = lat.localize_many(loc, lat.random_cells(l, loc.n, count, rng))
        back = lat.lift_many(loc, lat.project_many(loc, a, localized=True))
        fails = int(np.count_nonzero(np.any(back != a, axis=(1, 2))))
        return Report("project_lift_identity", rand, fails == 0, f"{fails} failures")

    for check in (idempotent, atom_law, roundtrip, project_hom, lift_project):
        checks.append(timed(check))
    return checks


def degeneration_check(l: lat.Lattice, n: int, seed: int, count: int) -> Report:
    """Over a two-element lattice, correspondence products match relation products."""
    rng = np.random.default_rng(seed)
    z, t = lat.bottom(l), lat.top(l)
    a = rng.integers(0, 1 << (n * n), size=count, dtype=np.int64)
    b = rng.integers(0, 1 << (n * n), size=count, dtype=np.int64)
    expected = compose_many(n, a, b).astype(np.int64)
    shifts = np.arange(n * n)

    def cells(bits):
        return np.where((bits[:, None] >> shifts) & 1, t, z).reshape(-1, n, n)

    got = lat.compose_corr_many(l, cells(a), cells(b))
    fails = int(np.count_nonzero(np.any(got != cells(expected), axis=(1, 2))))
    return Report("relation_degeneration", f"random({seed},{count})", fails == 0, f"{fails} failures")


def certify_correspondences(
    l: lat.Lattice,
    n: int,
    Y: Sequence[int] | None = None,
    c: int | None = None,
    mode: str = "structured",
    seed: int = 0,
    count: int = 100_000,
    workers: int | None = None,
) -> Certificate:
    """Certificate for lattice-valued correspondences on an ``n``-set: the
    localization at ``e_{Y,c}`` is checked to be a copy of B_4, then B_4 is
    certified as in :func:`certify_relations`."""
    loc = lat.make_localizer(l, n, Y, c)
    checks = [Report("lattice_axioms", "exhaustive", True, f"{l.size} elements, distributive")]
    checks += localization_checks(loc, seed, count)
    notes = ["localization e*M*e at the idempotent below is isomorphic to B_4; witnesses live in B_4"]
    if l.size == 2:
        checks.append(timed(degeneration_check, l, n, seed, count))
        notes.append(f"two-element lattice: these correspondences are exactly the relations of B_{n}")
    pair, b4_checks = _b_n_checks(4, mode, workers)
    checks += b4_checks
    subject = [
        ("monoid", f"{l.name or 'custom'}-valued correspondences on a {n}-element set"),
        ("lattice", l.name or "custom"),
        ("lattice_size", str(l.size)),
        ("n", str(n)),
    ]
    return Certificate(subject, pair, checks, loc.describe(), notes)
