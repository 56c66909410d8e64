"""Representation tables, symbolic operators and sum-of-powers forms."""

from .operators import DiffOperator, apply, commutator
from .polynomial import Poly, PolyExpFunction
from .representation import dpi_basis, dpi_element, rep_action, verify_commutators, verify_homomorphism
from .rockland import (
    UNVERIFIED,
    VERIFIED,
    FormTerm,
    RocklandForm,
    assemble_operator,
    classical_form,
    sublaplacian_form,
    validate_rockland_classical,
)

__all__ = [
    "DiffOperator",
    "FormTerm",
    "Poly",
    "PolyExpFunction",
    "RocklandForm",
    "UNVERIFIED",
    "VERIFIED",
    "apply",
    "assemble_operator",
    "classical_form",
    "commutator",
    "dpi_basis",
    "dpi_element",
    "rep_action",
    "sublaplacian_form",
    "validate_rockland_classical",
    "verify_commutators",
    "verify_homomorphism",
]
