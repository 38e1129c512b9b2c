"""Approximately maximising Nash social welfare over multi-copy goods with capped utilities."""
from .certify import (
    Certificate,
    auxiliary_bound,
    auxiliary_upper_bound,
    bmv_bound,
    bmv_greedy_set,
    individual_guarantee,
    large_market_check,
    nsw,
    nsw_nth_power,
    theoretical_factor,
)
from .generators import gen_capped_envy, gen_delta_large, gen_lower_bound, gen_multicopy_envy, gen_random
from .instance import Instance, InvalidInstance, ParameterError, RoundedInstance, cap_and_round, make_instance
from .market import MarketState, is_eps_p_ef1
from .oracle import OracleTooLarge, brute_force_opt, is_utility_ef1
from .solver import IterationCapExceeded, SolverOutput, solve

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "Instance",
    "InvalidInstance",
    "IterationCapExceeded",
    "MarketState",
    "OracleTooLarge",
    "ParameterError",
    "RoundedInstance",
    "SolverOutput",
    "auxiliary_bound",
    "auxiliary_upper_bound",
    "bmv_bound",
    "bmv_greedy_set",
    "brute_force_opt",
    "cap_and_round",
    "gen_capped_envy",
    "gen_delta_large",
    "gen_lower_bound",
    "gen_multicopy_envy",
    "gen_random",
    "individual_guarantee",
    "is_eps_p_ef1",
    "is_utility_ef1",
    "large_market_check",
    "make_instance",
    "nsw",
    "nsw_nth_power",
    "solve",
    "theoretical_factor",
]
