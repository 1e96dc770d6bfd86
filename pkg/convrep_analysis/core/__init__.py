"""
Core Components
===============

Grids, conjugation, convex representations of monotone operators, the
fixed-point order structure and the enlargement calculus.
"""

from .conjugation import (
    conjugate_bruteforce, conjugate_fast, conjugate_bifunction,
    j_transform, biconjugate, clconv, hull_mask,
)
from .representations import fenchel_young, fitzpatrick, sigma, membership_report
from .fixedpoint import is_in_Ha, hat, in_L, residual, heuristic_fixed_point, minimality_check
from .enlargements import (
    eps_subdifferential, t_eps, enlargement_from_h, transport,
    additivity_audit, weak_additivity_audit, inclusion_audit,
)

__all__ = [
    "conjugate_bruteforce", "conjugate_fast", "conjugate_bifunction",
    "j_transform", "biconjugate", "clconv", "hull_mask",
    "fenchel_young", "fitzpatrick", "sigma", "membership_report",
    "is_in_Ha", "hat", "in_L", "residual", "heuristic_fixed_point", "minimality_check",
    "eps_subdifferential", "t_eps", "enlargement_from_h", "transport",
    "additivity_audit", "weak_additivity_audit", "inclusion_audit",
]
