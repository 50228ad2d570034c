"""Irreducible elements of relation monoids, the homomorphism onto
k[x, y]/(x^2, y^2, xy) they induce, and lattice-valued correspondences."""

from .boolrel import Relation, all_relations, compose, is_unit, units
from .cert import HomImage, build_hom, certify_correspondences, certify_relations, target_mul
from .lattice import Correspondence, Lattice, compose_corr, lift, make_localizer, project, verify_lattice
from .sieve import Classification, Status, are_associates, canonical, classify_all, witness_pair

__version__ = "0.1.0"

__all__ = [
    "Classification",
    "Correspondence",
    "HomImage",
    "Lattice",
    "Relation",
    "Status",
    "all_relations",
    "are_associates",
    "build_hom",
    "canonical",
    "certify_correspondences",
    "certify_relations",
    "classify_all",
    "compose",
    "compose_corr",
    "is_unit",
    "lift",
    "make_localizer",
    "project",
    "target_mul",
    "units",
    "verify_lattice",
    "witness_pair",
]
