"""Abstract maximal-inequality framework on finite pointed families."""
from .certify import (DyadicReport, check_dyadic_conditions, dilation_hull, hl4_constant,
                      homogeneous_bound)
from .instance import EXACT, FLOAT, Instance, SetFunction, measure_of, set_function
from .maximal import (HLReport, MaximalProfile, empirical_hl_lower_bound, hl_ratio,
                      maximal_function, random_setfunction, singleton_ratio, superlevel_measure,
                      verify_hl_inequality)
from .norm import family_norm, is_laminar, norm_bounds
from .ops import build_integral_setfunction, family_union, integral_total, scale_measure

__all__ = [
    "EXACT", "FLOAT", "Instance", "SetFunction", "measure_of", "set_function",
    "MaximalProfile", "HLReport", "maximal_function", "superlevel_measure", "hl_ratio",
    "verify_hl_inequality", "empirical_hl_lower_bound", "random_setfunction", "singleton_ratio",
    "family_norm", "norm_bounds", "is_laminar",
    "dilation_hull", "hl4_constant", "check_dyadic_conditions", "DyadicReport",
    "homogeneous_bound",
    "build_integral_setfunction", "integral_total", "family_union", "scale_measure",
]
