"""Two-task stochastic cross-training: recourse, expected cost and optimal levels."""

from .errors import ConfigError, CrossTrainError, FeasibilityError, RegimeError
from .expect import (CostBreakdown, Evaluator, ExpectationConfig, Quadrature, SAA,
                     cost_gradient_fd, expected_cost, no_crosstraining_cost)
from .model import (Distribution, Instance, Pair, RandomSpec, RegimeTag, Scenario,
                    TaskParams, classify_regime, normalize, sample, with_overrides)
from .oracle import GridReport, grid_minimize
from .recourse import (FirstStage, RecourseOutcome, Region, classify_region,
                       recourse_closed_form, recourse_oracle)
from .solver import (SolveResult, SolverConfig, solve, solve_case1a, solve_case1b_consistent,
                     solve_case2a, solve_case2b_consistent, solve_global)
from .sweep import SweepSpec, run_sweep

__all__ = [
    "ConfigError", "CrossTrainError", "FeasibilityError", "RegimeError",
    "CostBreakdown", "Evaluator", "ExpectationConfig", "Quadrature", "SAA",
    "cost_gradient_fd", "expected_cost", "no_crosstraining_cost",
    "Distribution", "Instance", "Pair", "RandomSpec", "RegimeTag", "Scenario", "TaskParams",
    "classify_regime", "normalize", "sample", "with_overrides",
    "GridReport", "grid_minimize",
    "FirstStage", "RecourseOutcome", "Region", "classify_region",
    "recourse_closed_form", "recourse_oracle",
    "SolveResult", "SolverConfig", "solve", "solve_case1a", "solve_case1b_consistent",
    "solve_case2a", "solve_case2b_consistent", "solve_global",
    "SweepSpec", "run_sweep",
]
