"""Optimal investment and consumption with a liquid and an illiquid asset."""

from .hjb import CFLError, FixedPointError, NumericalError, SchemeConfig, SolveResult, solve
from .model import (DerivedConstants, ModelParams, ParameterError, compute_kp,
                    hjb_constants, merton_single_asset, merton_value, merton_weights,
                    participates, solve_K0, split_constants)
from .policy import cost_of_illiquidity, policy_field
from .sim import SimConfig, simulate

__version__ = "0.1.0"

__all__ = [
    "CFLError", "DerivedConstants", "FixedPointError", "ModelParams", "NumericalError",
    "ParameterError", "SchemeConfig", "SimConfig", "SolveResult", "compute_kp",
    "cost_of_illiquidity", "hjb_constants", "merton_single_asset", "merton_value",
    "merton_weights", "participates", "policy_field", "simulate", "solve", "solve_K0",
    "split_constants",
]
