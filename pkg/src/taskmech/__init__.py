"""Optimal reward schedules for crowdsourced tasks with hidden worker types."""
from .agent import AgentDecision, agent_utility, best_participation, brute_force_best_response
from .config import ProblemConfig, default_config, load_config, parse_config
from .econ_model import (MarketParams, Models, RevenueModel, SatisfactionModel, TypeDistribution,
                         TypeGrid, inverse_hazard, make_custom, make_grid, make_uniform,
                         validate_assumptions)
from .mechanism import RewardSchedule, build_schedule, compute_beta, expected_profit
from .solver import GammaSchedule, SolverConfig, optimize_alpha0, solve
from .verifier import VerificationReport, VerifyThresholds, utility_matrix, verify

__version__ = "0.1.0"
