"""Secrecy-rate maximization for pinching-antenna systems with artificial noise."""

from .model import Position, SystemParams, make_params
from .multi import MultiSolveConfig, Scenario, solve_multi
from .rates import BeamformingState, RatePair, secrecy_rate
from .single import ScalarScenario, solve_single

__version__ = "0.1.0"

__all__ = [
    "BeamformingState", "MultiSolveConfig", "Position", "RatePair", "ScalarScenario",
    "Scenario", "SystemParams", "make_params", "secrecy_rate", "solve_multi", "solve_single",
]
