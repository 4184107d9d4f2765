"""causal-scope: interventional boundary discovery for control environments.

Builds synthetic control environments with confounded distractor
observations, recovers the set of action-influenced observation
dimensions with an intervention-based two-sample testing pipeline, and
compares against observational baselines and a downstream control
harness.
"""

__version__ = "0.1.0"

from .baselines import BASELINE_METHODS, ForwardModel, SelectionResult, run_baseline
from .downstream import CEMConfig, LinearPolicy, cem_train
from .env import ConfigError, EnvConfig, Environment, make_env
from .metrics import BoundaryScore, aggregate, score_mask
from .probe import ProbeConfig, Trajectory, TrajectorySet, collect, collect_pair
from .stats import (
    MaskResult,
    TestConfig,
    bh_adjust,
    discover,
    permutation_test,
    summary_delta,
    welch_t,
)
from .sweeps import partial_sweep, scaling_sweep, scout_sweep

__all__ = [
    "__version__",
    "BASELINE_METHODS",
    "BoundaryScore",
    "CEMConfig",
    "ConfigError",
    "EnvConfig",
    "Environment",
    "ForwardModel",
    "LinearPolicy",
    "MaskResult",
    "ProbeConfig",
    "SelectionResult",
    "TestConfig",
    "Trajectory",
    "TrajectorySet",
    "aggregate",
    "bh_adjust",
    "cem_train",
    "collect",
    "collect_pair",
    "discover",
    "make_env",
    "partial_sweep",
    "permutation_test",
    "run_baseline",
    "scaling_sweep",
    "score_mask",
    "scout_sweep",
    "summary_delta",
    "welch_t",
]
