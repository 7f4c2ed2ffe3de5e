"""Seedable Monte Carlo simulator for request-offer resource dynamics
with money on complex networks."""

from .dynamics import ModelParams, SimState, SurvivalRecord, run_simulation, run_time_step
from .graphgen import (
    Multigraph,
    TopologyConfig,
    analytic_tail_fraction,
    build_configuration_model,
    build_graph,
    load_graph,
    mean_degree,
    save_graph,
)
from .harness import ExperimentConfig, derive_seed, load_config, run_ensemble, write_results
from .metrics import degree_profile, low_high_decomposition, survival_summary
from .moneyinit import MoneyAllocation, allocate_money
from .strategies import STRATEGY_NAMES, StrategyKind

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "SimState",
    "SurvivalRecord",
    "run_simulation",
    "run_time_step",
    "Multigraph",
    "TopologyConfig",
    "analytic_tail_fraction",
    "build_configuration_model",
    "build_graph",
    "load_graph",
    "mean_degree",
    "save_graph",
    "ExperimentConfig",
    "derive_seed",
    "load_config",
    "run_ensemble",
    "write_results",
    "degree_profile",
    "low_high_decomposition",
    "survival_summary",
    "MoneyAllocation",
    "allocate_money",
    "STRATEGY_NAMES",
    "StrategyKind",
    "__version__",
]
