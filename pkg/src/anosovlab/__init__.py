"""Numerical laboratory for Anosov representations of surface and free groups."""
from .words import EnumerationMode, Presentation, Word, enumerate_words
from .matgap import Representation, ScaledMatrix, evaluate, first_gaps
from .models import ModelSpace
from .limits import build_dictionary, limit_point
from .exponents import alpha_rho, beta_rho, holder_scan
from .families import FamilyParams, derived_examples, family_st, fuchsian_octagon, named_family, schottky

__all__ = [
    "EnumerationMode",
    "Presentation",
    "Word",
    "enumerate_words",
    "Representation",
    "ScaledMatrix",
    "evaluate",
    "first_gaps",
    "ModelSpace",
    "build_dictionary",
    "limit_point",
    "alpha_rho",
    "beta_rho",
    "holder_scan",
    "FamilyParams",
    "derived_examples",
    "named_family",
    "family_st",
    "fuchsian_octagon",
    "schottky",
]
