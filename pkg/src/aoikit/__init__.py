"""Age-of-information toolkit for an energy-harvesting sensor with a unit
battery sending over an erasure channel with feedback.

Analytic side: closed-form epoch moments, the Dinkelbach auxiliary function,
and solvers for the minimal long-run average age and its waiting threshold.
Stochastic side: renewal-epoch and event-driven simulators that verify the
analytic optimum, plus sweep and feedback-gain experiments emitted as CSV.
"""
from .analytic import (
    DinkelbachSolution,
    expected_epoch_length,
    expected_epoch_reward,
    first_attempt_moments,
    infinite_battery_aoi,
    no_feedback_mean_aoi,
    optimal_threshold,
    p_lambda,
    solve_dinkelbach_iteration,
    solve_lambda_star,
)
from .core import (
    DEFAULT_SEED,
    ChannelParams,
    ConvergenceError,
    EpochOutcome,
    NoFeedbackThresholdPolicy,
    ParameterError,
    RngStream,
    ThresholdGreedyPolicy,
    TimelineState,
    draw_erasure,
    draw_exponential,
    draw_exponentials,
    exponential_from_uniform,
    resolve_policy,
)
from .experiments import GainRow, SweepRow, gain_study, sweep_q, write_gain_csv, write_sweep_csv
from .sim import SimEstimate, TimelineResult, ratio_mean_aoi, run_timeline, simulate_epoch, simulate_timeline

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SEED",
    "ChannelParams",
    "ConvergenceError",
    "DinkelbachSolution",
    "EpochOutcome",
    "GainRow",
    "NoFeedbackThresholdPolicy",
    "ParameterError",
    "RngStream",
    "SimEstimate",
    "SweepRow",
    "ThresholdGreedyPolicy",
    "TimelineResult",
    "TimelineState",
    "draw_erasure",
    "draw_exponential",
    "draw_exponentials",
    "expected_epoch_length",
    "expected_epoch_reward",
    "exponential_from_uniform",
    "first_attempt_moments",
    "gain_study",
    "infinite_battery_aoi",
    "no_feedback_mean_aoi",
    "optimal_threshold",
    "p_lambda",
    "ratio_mean_aoi",
    "resolve_policy",
    "run_timeline",
    "simulate_epoch",
    "simulate_timeline",
    "solve_dinkelbach_iteration",
    "solve_lambda_star",
    "sweep_q",
    "write_gain_csv",
    "write_sweep_csv",
]
