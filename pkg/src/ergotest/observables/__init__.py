"""Separately Hölder observables and their constants."""
from .families import (
    FAMILIES,
    FAMILY_BIRKHOFF,
    FAMILY_BLACK_BOX,
    FAMILY_CONSTANT,
    FAMILY_PAIR,
    FAMILY_WEIGHTED_SUP,
    evaluate_on_window,
    make_birkhoff,
    make_constant,
    make_pair_correlation,
    make_weighted_sup,
    padded,
    scaled,
)
from .holder import black_box, estimate_holder_constant, estimate_phi
from .observable import SeparatelyHoelderObservable, observed_coordinate
from .phi import BUILTIN_PHI, PhiFunction, available_phi, constant_phi, get_phi, register_phi

__all__ = [
    "BUILTIN_PHI",
    "FAMILIES",
    "FAMILY_BIRKHOFF",
    "FAMILY_BLACK_BOX",
    "FAMILY_CONSTANT",
    "FAMILY_PAIR",
    "FAMILY_WEIGHTED_SUP",
    "PhiFunction",
    "SeparatelyHoelderObservable",
    "available_phi",
    "black_box",
    "constant_phi",
    "estimate_holder_constant",
    "estimate_phi",
    "evaluate_on_window",
    "get_phi",
    "make_birkhoff",
    "make_constant",
    "make_pair_correlation",
    "make_weighted_sup",
    "observed_coordinate",
    "padded",
    "register_phi",
    "scaled",
]
