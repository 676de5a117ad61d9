"""Torsion of CM elliptic curves over number fields of odd degree."""

from .classnum import ClassNumberCache, batch_class_numbers, class_number, l_value
from .density import (DensityInterval, MultiplesSet, density_of_multiples, factor_out_relprime,
                      olson_density_upper, p_split, stratum_density)
from .odt import (TorsionGroup, delta, equivalent, fingerprint, groups, is_olson,
                  olson_generators, r_count, realizable, t_cm, threshold)

__all__ = [
    "ClassNumberCache", "batch_class_numbers", "class_number", "l_value",
    "DensityInterval", "MultiplesSet", "density_of_multiples", "factor_out_relprime",
    "olson_density_upper", "p_split", "stratum_density",
    "TorsionGroup", "delta", "equivalent", "fingerprint", "groups", "is_olson",
    "olson_generators", "r_count", "realizable", "t_cm", "threshold",
]
__version__ = "0.1.0"
