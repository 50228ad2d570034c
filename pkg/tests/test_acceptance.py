"""Exit criteria.  Each test is one criterion; the run ends with a
PASS/FAIL line per criterion (see conftest)."""

import time

import numpy as np
import pytest

from relmonoid import lattice as lat
from relmonoid.boolrel import Relation, all_relations, compose, compose_many, is_unit
from relmonoid.cert import HomImage, build_hom, verify_hom_exhaustive, verify_hom_structured
from relmonoid.cli import main
from relmonoid.sieve import Status, canonical_table, classify_all, default_workers, witness_pair

import oracles

SIEVE_BUDGET_S = 5 * 60
HOM_BUDGET_S = 10 * 60
LOCALIZE_BUDGET_S = 2 * 60
N2_AGREEMENT_BUDGET_S = 1.0

GOLDEN_B4 = {"units": 24, "reducible": 65248, "irreducible": 264, "classes": 3}
LATTICES = ("chain2", "chain3", "chain5", "boolean2")


@pytest.fixture(scope="module")
def full_b4():
    start = time.perf_counter()
    c = classify_all(4, "full", workers=min(8, default_workers()))
    return c, time.perf_counter() - start


def test_criterion_1_witness_existence(full_b4, b4):
    c, elapsed = full_b4
    counts = c.counts()
    print(f"\nfull-pair sieve n=4: {elapsed:.1f}s, counts {counts}, classes {len(c.class_reps)}")
    assert elapsed <= SIEVE_BUDGET_S
    assert len(c.class_reps) >= 2
    got = {
        "units": counts[Status.UNIT],
        "reducible": counts[Status.REDUCIBLE],
        "irreducible": counts[Status.IRREDUCIBLE],
        "classes": len(c.class_reps),
    }
    assert got == GOLDEN_B4
    assert c == b4, "symmetry-reduced sieve disagrees with full-pair sieve"
    assert np.array_equal(c.status, b4.status)

    p, q = witness_pair(c)
    print(f"witnesses p={p} q={q}")
    assert oracles.factorable(4, [p.bits, q.bits]) == {p.bits: False, q.bits: False}
    assert not is_unit(p) and not is_unit(q)
    assert q.bits not in oracles.orbit_by_composition(4, p.bits)


def test_criterion_2_homomorphism(b4, classifications):
    p, q = witness_pair(b4)
    t = build_hom(b4, p, q)
    structured = verify_hom_structured(t, b4)
    assert structured.passed, structured.detail
    start = time.perf_counter()
    exhaustive = verify_hom_exhaustive(t, workers=min(8, default_workers()))
    elapsed = time.perf_counter() - start
    print(f"\nexhaustive check over 65536^2 pairs: {elapsed:.1f}s, {exhaustive.detail}")
    assert exhaustive.passed and exhaustive.counterexample is None
    assert elapsed <= HOM_BUDGET_S

    c2 = classifications[2]
    start = time.perf_counter()
    base = build_hom(c2)
    tables = [base] + [base.with_image(b, v) for b in range(16) for v in HomImage]
    verdicts = [(verify_hom_structured(tt, c2).passed, verify_hom_exhaustive(tt, workers=1).passed) for tt in tables]
    elapsed2 = time.perf_counter() - start
    print(f"n=2 agreement over {len(tables)} tables: {elapsed2 * 1000:.0f}ms")
    assert all(s == e for s, e in verdicts)
    assert verdicts[0] == (True, True)
    assert elapsed2 < N2_AGREEMENT_BUDGET_S


def test_criterion_3_finite_type_consistency(classifications, tmp_path, capsys):
    for n in (2, 3):
        c = classifications[n]
        assert len(c.class_reps) <= 1
        assert witness_pair(c) is None
    code = main(["certify", "--relations", "--n", "3", "--outdir", str(tmp_path)])
    capsys.readouterr()
    assert code != 0


def test_criterion_4_localization():
    start = time.perf_counter()
    every = np.arange(1 << 16)
    failures = {}
    for name in LATTICES:
        l = lat.builtin(name)
        for n in (4, 5, 6):
            loc = lat.make_localizer(l, n)
            assert lat.compose_corr(loc.e, loc.e) == loc.e
            lifted = lat.lift_many(loc, every)
            assert np.array_equal(lat.project_many(loc, lifted), every)
            rng = np.random.default_rng([LATTICES.index(name), n])
            a = lat.random_cells(l, n, 10**5, rng)
            b = lat.random_cells(l, n, 10**5, rng)
            la, lb = lat.localize_many(loc, a), lat.localize_many(loc, b)
            lhs = lat.project_many(loc, lat.compose_corr_many(l, la, lb))
            rhs = oracles.matmul_compose(4, lat.project_many(loc, a), lat.project_many(loc, b))
            failures[(name, n)] = int(np.count_nonzero(lhs != rhs))
    elapsed = time.perf_counter() - start
    print(f"\nlocalization suite: {elapsed:.1f}s, failures {failures}")
    assert all(v == 0 for v in failures.values())
    assert elapsed <= LOCALIZE_BUDGET_S


def test_criterion_5_two_element_degeneration():
    l = lat.build_chain(2)
    for r in all_relations(2):
        for s in all_relations(2):
            got = lat.compose_corr(lat.Correspondence(l, r.to_matrix().astype(int)),
                                   lat.Correspondence(l, s.to_matrix().astype(int)))
            assert Relation.from_matrix(got.cells) == compose(r, s)
    rng = np.random.default_rng(5)
    a = rng.integers(0, 1 << 16, size=10**6)
    b = rng.integers(0, 1 << 16, size=10**6)
    got = lat.compose_corr_many(l, oracles.to_matrices(4, a), oracles.to_matrices(4, b))
    assert np.array_equal(oracles.from_matrices(got), compose_many(4, a, b).astype(np.int64))


def test_criterion_6_property_suites(capsys):
    every = np.arange(16)
    x, y, z = (m.ravel() for m in np.meshgrid(every, every, every, indexing="ij"))
    assert np.array_equal(compose_many(2, compose_many(2, x, y), z), compose_many(2, x, compose_many(2, y, z)))
    rng = np.random.default_rng(6)
    x, y, z = (rng.integers(0, 1 << 16, size=10**6) for _ in range(3))
    assert np.array_equal(compose_many(4, compose_many(4, x, y), z), compose_many(4, x, compose_many(4, y, z)))

    for n in (1, 2, 3):
        for r in all_relations(n):
            assert is_unit(r) == oracles.has_inverse(n, r.bits)

    table = canonical_table(4)
    perms = np.array(oracles.permutation_bits(4))
    r = rng.integers(0, 1 << 16, size=10**5)
    moved = compose_many(4, compose_many(4, rng.choice(perms, r.size), r), rng.choice(perms, r.size))
    assert np.array_equal(table[moved.astype(np.int64)], table[r])

    for name in lat.BUILTIN_NAMES:
        l = lat.builtin(name)
        z0 = lat.bottom(l)
        for c in lat.atoms(l):
            assert all(int(l.meet[c, a]) in (z0, c) for a in range(l.size))

    with capsys.disabled():
        for label, tables in (("M3", lat.m3_tables()), ("N5", lat.n5_tables())):
            with pytest.raises(lat.LatticeError) as info:
                lat.verify_lattice(*tables)
            assert info.value.axiom == "distributivity" and len(info.value.witness) == 3
            print(f"\n{label} rejected: {info.value}")


def test_criterion_7_mutations(b4):
    p, q = witness_pair(b4)
    t = build_hom(b4, p, q)
    assert verify_hom_structured(t, b4).passed

    associate = int(np.flatnonzero(b4.canonical == p.bits)[-1])
    r = verify_hom_structured(t.with_image(associate, HomImage.ZERO), b4)
    assert not r.passed and r.detail.startswith("fact i:")

    reducible = int(np.flatnonzero(b4.status == Status.REDUCIBLE)[0])
    r = verify_hom_structured(t, b4.with_status(reducible, Status.IRREDUCIBLE))
    assert not r.passed and r.detail.startswith("fact ii:")

    r = verify_hom_structured(t.with_image(0, HomImage.Y), b4)
    assert not r.passed and r.detail.startswith("fact iii:")

    r = verify_hom_exhaustive(t.with_image(Relation.identity(4).bits, HomImage.ZERO), workers=1)
    assert not r.passed and r.counterexample is not None
