"""Weak-type maximal inequalities on finite pointed families.

``hlml.core`` holds instances, the maximal function, the disjoint-sum norm
and the certification routes; ``covering``, ``euclid``, ``tree`` and ``axb``
supply geometries; ``harness`` runs experiments and ``cli`` wraps it all.
"""
from .core import (Instance, build_integral_setfunction, check_dyadic_conditions,
                   empirical_hl_lower_bound, family_norm, family_union, hl4_constant, hl_ratio,
                   homogeneous_bound, maximal_function, scale_measure, verify_hl_inequality)
from .errors import (CapacityError, ConfigurationError, HLError, HypothesisError, MalformedInput,
                     SamplingError)

__version__ = "0.1.0"

__all__ = [
    "Instance", "maximal_function", "family_norm", "hl_ratio", "verify_hl_inequality",
    "empirical_hl_lower_bound", "hl4_constant", "check_dyadic_conditions", "homogeneous_bound",
    "build_integral_setfunction", "family_union", "scale_measure",
    "HLError", "MalformedInput", "CapacityError", "HypothesisError", "ConfigurationError",
    "SamplingError",
]
