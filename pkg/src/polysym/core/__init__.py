"""Structures, operations, identity classes and direct verification."""

from .identity import KINDS, IdentitySpec, canonical_form, identity, least_rotation
from .operation import Operation, all_tuples, compose, encode, permute_arguments
from .rng import SplitMix64, splitmix64
from .structure import (
    Permutation,
    Relation,
    RelStructure,
    StructureError,
    as_permutation,
    load_structure,
    loops,
    permutation_graph,
    structure_from_dict,
)
from .verify import EXHAUSTIVE, Policy, VerificationReport, is_polymorphism, sampled, satisfies_identity

__all__ = [
    "KINDS", "IdentitySpec", "canonical_form", "identity", "least_rotation",
    "Operation", "all_tuples", "compose", "encode", "permute_arguments",
    "SplitMix64", "splitmix64",
    "Permutation", "Relation", "RelStructure", "StructureError", "as_permutation",
    "load_structure", "loops", "permutation_graph", "structure_from_dict",
    "EXHAUSTIVE", "Policy", "VerificationReport", "is_polymorphism", "sampled",
    "satisfies_identity",
]
