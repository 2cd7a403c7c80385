"""Conditional-sampling (COND) toolkit for support-size estimation.

The main entry points are re-exported here; see the submodules for the
rest.
"""
from ._rng import RNG_ALGORITHM, derive_seed, make_rng
from .compare import CompareResult, Outcome, compare, compare_cost
from .distribution import (FULL_DOMAIN, BernoulliImplicit, Explicit, FullDomain,
                           PiecewiseDistribution, explicit, light_set_size, mass_of, support_size)
from .errors import CondError, ConsumedQuerySet, EmptyQuerySet, UnsupportedQuerySet
from .instances import gen_equivalence_instance, gen_support_pair, tv_distance
from .oracle import CondOracle, Transcript, cond_sample
from .support import (ProbeVerdict, SupportEstimate, Verdict, collision_uniformity_test,
                      estimate_support, estimate_support_nonadaptive, get_non_support,
                      is_at_most_support_size, test_small_support)

__version__ = "0.1.0"

__all__ = [
    "RNG_ALGORITHM", "derive_seed", "make_rng",
    "CompareResult", "Outcome", "compare", "compare_cost",
    "FULL_DOMAIN", "BernoulliImplicit", "Explicit", "FullDomain", "PiecewiseDistribution",
    "explicit", "light_set_size", "mass_of", "support_size",
    "CondError", "ConsumedQuerySet", "EmptyQuerySet", "UnsupportedQuerySet",
    "gen_equivalence_instance", "gen_support_pair", "tv_distance",
    "CondOracle", "Transcript", "cond_sample",
    "ProbeVerdict", "SupportEstimate", "Verdict", "collision_uniformity_test",
    "estimate_support", "estimate_support_nonadaptive", "get_non_support",
    "is_at_most_support_size", "test_small_support",
]
