"""Matrix elements of boson operators between multi-species coherent states."""
from .algebra import NormalTerm, OperatorPoly, adjoint, bilinear, multiply, normal_order, simplify
from .coherent import (
    CoherentFrame,
    annihilate_product,
    collect_partitions,
    count_contributing,
    expectation,
    matrix_element,
    matrix_element_poly,
    two_species_closed,
    validate_frame,
)
from .fock import coherent_vector, eigensolve, enumerate_basis, matrix_of, me_oracle

__all__ = [
    "CoherentFrame",
    "NormalTerm",
    "OperatorPoly",
    "adjoint",
    "annihilate_product",
    "bilinear",
    "coherent_vector",
    "collect_partitions",
    "count_contributing",
    "eigensolve",
    "enumerate_basis",
    "expectation",
    "matrix_element",
    "matrix_element_poly",
    "matrix_of",
    "me_oracle",
    "multiply",
    "normal_order",
    "simplify",
    "two_species_closed",
    "validate_frame",
]
