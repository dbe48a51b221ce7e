"""Posted-price prophet-secretary simulation laboratory.

Online selection with known finite-support value distributions and iid
uniform arrival times: dynamic discounted posted prices and fixed smoothed
thresholds, exact offline oracles, and a seeded Monte Carlo harness for
competitive-ratio estimation.
"""

from .common import CapacityError, ExpectationEstimate, ValidationError
from .distributions import DiscreteDistribution, SmoothedThreshold, expected_max, smoothed_threshold
from .hardness import fta_sweep, hard_exact_opt, hard_iid_instance
from .instances import (
    Instance,
    VectorDistribution,
    gen_matching,
    gen_matroid,
    gen_single_item,
    gen_xos,
    instance_from_json,
    instance_to_json,
    load_instance,
    save_instance,
)
from .lp import solve_configuration_lp, solve_lp, xos_base_prices
from .matroids import GraphicMatroid, PartitionMatroid, UniformMatroid, greedy_opt
from .offline import expected_opt, max_weight_matching, offline_value, xos_welfare_opt
from .online import Arrival, FtaMatchingPolicy, TrialOutcome, fta_matching_prepare
from .pricing import MatroidPricer, discount, matching_base_prices, single_item_base_price
from .simulation import QCurve, RatioReport, SimConfig, run_trials, track_q
from .valuations import BuyerValuationDistribution, XosValuation, additive, unit_demand

__all__ = [
    "Arrival",
    "BuyerValuationDistribution",
    "CapacityError",
    "DiscreteDistribution",
    "ExpectationEstimate",
    "FtaMatchingPolicy",
    "GraphicMatroid",
    "Instance",
    "MatroidPricer",
    "PartitionMatroid",
    "QCurve",
    "RatioReport",
    "SimConfig",
    "SmoothedThreshold",
    "TrialOutcome",
    "UniformMatroid",
    "ValidationError",
    "VectorDistribution",
    "XosValuation",
    "additive",
    "discount",
    "expected_max",
    "expected_opt",
    "fta_matching_prepare",
    "fta_sweep",
    "gen_matching",
    "gen_matroid",
    "gen_single_item",
    "gen_xos",
    "greedy_opt",
    "hard_exact_opt",
    "hard_iid_instance",
    "instance_from_json",
    "instance_to_json",
    "load_instance",
    "matching_base_prices",
    "max_weight_matching",
    "offline_value",
    "run_trials",
    "save_instance",
    "single_item_base_price",
    "smoothed_threshold",
    "solve_configuration_lp",
    "solve_lp",
    "track_q",
    "unit_demand",
    "xos_base_prices",
    "xos_welfare_opt",
]

__version__ = "0.1.0"
