import itertools

import numpy as np
import pytest

from relmonoid.boolrel import Relation
from relmonoid.cert import (
    INFINITE,
    NOT_ESTABLISHED,
    HomImage,
    build_hom,
    certify_correspondences,
    certify_relations,
    parse_certificate,
    target_mul,
    verify_hom_exhaustive,
    verify_hom_structured,
    verify_surjective,
)
from relmonoid.lattice import build_chain
from relmonoid.sieve import Status, canonical, witness_pair

ONE, X, Y, ZERO = HomImage.ONE, HomImage.X, HomImage.Y, HomImage.ZERO


def test_target_mul_examples():
    assert target_mul(ONE, X) == X
    assert target_mul(X, Y) == ZERO
    assert target_mul(Y, X) == ZERO
    assert X * X == ZERO and ONE * ONE == ONE


def test_target_mul_is_a_monoid():
    for s in HomImage:
        assert ONE * s == s == s * ONE
        assert ZERO * s == ZERO == s * ZERO
    for s, t, u in itertools.product(HomImage, repeat=3):
        assert (s * t) * u == s * (t * u)


def test_target_mul_matches_polynomial_arithmetic():
    # multiply a + bx + cy representatives in k[x, y] and reduce mod (x^2, y^2, xy)
    poly = {ONE: (1, 0, 0), X: (0, 1, 0), Y: (0, 0, 1), ZERO: (0, 0, 0)}
    back = {v: k for k, v in poly.items()}
    for s, t in itertools.product(HomImage, repeat=2):
        a1, b1, c1 = poly[s]
        a2, b2, c2 = poly[t]
        prod = (a1 * a2, a1 * b2 + b1 * a2, a1 * c2 + c1 * a2)
        assert back[prod] == target_mul(s, t)


@pytest.fixture(scope="module")
def hom4(b4):
    p, q = witness_pair(b4)
    return build_hom(b4, p, q)


def test_build_hom_values(b4, hom4):
    p, q = witness_pair(b4)
    assert hom4[Relation.identity(4)] == ONE
    assert hom4[p] == X and hom4[q] == Y
    assert hom4[Relation.zero(4)] == ZERO
    assert np.count_nonzero(hom4.image == X) == 96
    assert verify_surjective(hom4).passed


def test_build_hom_rejects_bad_witnesses(b4):
    p, q = witness_pair(b4)
    with pytest.raises(ValueError, match="not irreducible"):
        build_hom(b4, Relation.zero(4), q)
    with pytest.raises(ValueError, match="associates"):
        build_hom(b4, p, Relation(4, int(np.flatnonzero(b4.canonical == p.bits)[-1])))


def test_structured_passes_on_b4(b4, hom4):
    report = verify_hom_structured(hom4, b4)
    assert report.passed, report.detail


def test_degenerate_n1(classifications):
    c = classifications[1]
    t = build_hom(c)
    assert t.image.tolist() == [ZERO, ONE]
    assert verify_hom_structured(t, c).passed
    assert verify_hom_exhaustive(t, workers=1).passed
    assert not verify_surjective(t).passed


def test_structured_and_exhaustive_agree_n2(classifications):
    """Every single-entry remapping of the n = 2 table gets the same verdict
    from both verifiers."""
    c = classifications[2]
    base = build_hom(c)
    assert verify_hom_structured(base, c).passed and verify_hom_exhaustive(base, workers=1).passed
    for bits in range(16):
        for value in HomImage:
            t = base.with_image(bits, value)
            assert verify_hom_structured(t, c).passed == verify_hom_exhaustive(t, workers=1).passed, (bits, value)


def test_structured_and_exhaustive_agree_n3(classifications):
    c = classifications[3]
    (rep,) = c.representatives
    t = build_hom(c, rep)
    assert verify_hom_structured(t, c).passed
    assert verify_hom_exhaustive(t, workers=1).passed
    # x on the one class and y on nothing: q absent is still a homomorphism
    t2 = build_hom(c, None, rep)
    assert verify_hom_exhaustive(t2, workers=1).passed


# -- mutation tests: each corruption must flip the verdict -------------------


def test_mutation_fact_i(b4, hom4):
    p = hom4.p
    other = int(np.flatnonzero(b4.canonical == p)[-1])
    assert other != p
    report = verify_hom_structured(hom4.with_image(other, ZERO), b4)
    assert not report.passed and report.detail.startswith("fact i:")


def test_mutation_fact_ii(b4, hom4):
    victim = int(np.flatnonzero(b4.status == Status.REDUCIBLE)[100])
    report = verify_hom_structured(hom4, b4.with_status(victim, Status.IRREDUCIBLE))
    assert not report.passed and report.detail.startswith("fact ii:")
    assert report.counterexample == (Relation(4, victim),)


def test_mutation_fact_iii(b4, hom4):
    # the zero relation is its own associate class, so remapping it keeps (i)
    assert canonical(Relation.zero(4)) == Relation.zero(4)
    assert np.count_nonzero(b4.canonical == 0) == 1
    report = verify_hom_structured(hom4.with_image(0, X), b4)
    assert not report.passed and report.detail.startswith("fact iii:")


@pytest.mark.slow
def test_mutation_unit_remap_exhaustive(hom4, b4):
    bad = hom4.with_image(Relation.identity(4).bits, ZERO)
    report = verify_hom_exhaustive(bad, workers=1)
    assert not report.passed
    a, b = report.counterexample
    assert bad.image[(a @ b).bits] != target_mul(HomImage(int(bad.image[a.bits])), HomImage(int(bad.image[b.bits])))
    assert not verify_hom_structured(bad, b4).passed


def test_exhaustive_counterexample_independent_of_workers(classifications):
    c = classifications[3]
    bad = build_hom(c).with_image(Relation.identity(3).bits, X)
    one = verify_hom_exhaustive(bad, workers=1)
    many = verify_hom_exhaustive(bad, workers=3)
    assert not one.passed and one.counterexample == many.counterexample


# -- certificates -------------------------------------------------------------


def test_certificate_b1_not_established():
    cert = certify_relations(1)
    assert cert.verdict == NOT_ESTABLISHED
    assert cert.witnesses is None


def test_certificate_b3_not_established():
    cert = certify_relations(3)
    assert cert.verdict == NOT_ESTABLISHED
    names = {r.name: r.passed for r in cert.checks}
    assert names["witness_pair"] is False


def test_certificate_b4_structured():
    cert = certify_relations(4, "structured", workers=1)
    assert cert.verdict == INFINITE
    text = cert.to_text()
    sections = parse_certificate(text)
    assert list(sections) == ["SUBJECT", "WITNESSES", "CHECKS", "VERDICT"]
    assert sections["WITNESSES"] == ["p=4:16ac", "q=4:359e"]
    assert sections["VERDICT"] == [INFINITE]
    for line in sections["CHECKS"]:
        name, mode, result, ms = line.split(" ")
        assert mode.startswith("mode=") and result == "result=pass" and ms == "elapsed_ms=0"
    assert certify_relations(4, "structured", workers=1).to_text() == text


def test_certificate_failed_check_blocks_verdict():
    cert = certify_relations(4, "structured", workers=1)
    cert.checks[-1].passed = False
    assert cert.verdict == NOT_ESTABLISHED


def test_certificate_chain3_n5():
    cert = certify_correspondences(build_chain(3), 5, seed=11, count=20_000, workers=1)
    assert cert.verdict == INFINITE
    sections = parse_certificate(cert.to_text())
    assert "LOCALIZER" in sections
    assert "atom=1" in sections["LOCALIZER"] and "Y=1,2,3,4" in sections["LOCALIZER"]
    assert any(line.startswith("project_homomorphism mode=random(11,20000)") for line in sections["CHECKS"])
    again = certify_correspondences(build_chain(3), 5, seed=11, count=20_000, workers=1)
    assert again.to_text() == cert.to_text()


def test_certificate_chain2_notes_relations():
    cert = certify_correspondences(build_chain(2), 4, count=10_000, workers=1)
    assert cert.verdict == INFINITE
    assert any("exactly the relations of B_4" in note for note in cert.notes)
    assert any(r.name == "relation_degeneration" and r.passed for r in cert.checks)
