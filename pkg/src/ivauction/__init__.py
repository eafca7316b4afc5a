"""Optimal truthful mechanisms for interdependent-value auctions.

Exact rational solvers for the three optimization targets -- randomized
value maximization, randomized cost minimization, and deterministic rules --
with EPIC payment synthesis, brute-force oracles, and hardness-instance
generators.
"""

from ._rat import BACKEND, Rat, fmt_rat, parse_rat, rat
from .core import (
    CHORE,
    GOOD,
    AllocationRule,
    Instance,
    LineOrdering,
    Ratios,
    TruthfulnessReport,
    candidate_gammas,
    eval_ratio,
    is_truthful,
    orderings_from_instance,
    ratios_from_values,
    sos_values_from_ratios,
    total_increasing_ordering,
    uniform_rule,
    values_from_ratios,
)
from .payments import PaymentRule, synthesize_payments, verify_ic_ir
from .report import SolveReport

__version__ = "0.1.0"
