"""Closed forms for the threshold-greedy policy and the optimal-age solvers.

The long-run average age of a renewal policy is the ratio of the expected
per-epoch age area to the expected epoch length. Minimizing that ratio is a
fractional program; Dinkelbach's device replaces it with the root of the
decreasing auxiliary function

    p(lam) = min over policies of  E[area] - lam * E[length],

whose unique zero equals the minimal average age. For this system the inner
minimum is attained by a threshold-greedy policy with threshold
``max(lam - q/(1-q), 0)``, which makes p piecewise and explicit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

from .core import ChannelParams, ConvergenceError, ParameterError

__all__ = [
    "DEFAULT_TOL",
    "MAX_ITERATIONS",
    "MAX_Q",
    "DinkelbachSolution",
    "expected_epoch_length",
    "expected_epoch_reward",
    "first_attempt_moments",
    "infinite_battery_aoi",
    "no_feedback_mean_aoi",
    "optimal_threshold",
    "p_lambda",
    "solve_dinkelbach_iteration",
    "solve_lambda_star",
]

DEFAULT_TOL = 1e-10
MAX_ITERATIONS = 200
# q/(1-q) is used directly; the formulas are validated up to this point and
# larger values are rejected as out of range.
MAX_Q = 0.99


def _check_channel(params: ChannelParams) -> None:
    if not 0.0 < params.q < 1.0:
        raise ParameterError(f"closed forms require q in (0, 1), got {params.q!r}")
    if params.q > MAX_Q:
        raise ParameterError(f"q = {params.q!r} is above the validated range (q <= {MAX_Q})")


def _check_tol(tol: float) -> None:
    if not (isinstance(tol, (int, float)) and tol > 0.0):
        raise ParameterError(f"tolerance must be positive, got {tol!r}")


@dataclass(frozen=True)
class DinkelbachSolution:
    """Root of the auxiliary function and the threshold it induces.

    ``lambda_star`` is the minimal long-run average age, ``gamma_star`` the
    waiting threshold that achieves it, ``residual`` the absolute value of
    the auxiliary function at the returned root. ``trace`` carries the
    iterates for the ratio-iteration method (empty for bisection).
    """

    lambda_star: float
    gamma_star: float
    residual: float
    iterations: int
    method: str
    trace: Tuple[float, ...] = ()


def first_attempt_moments(gamma: float) -> Tuple[float, float]:
    """Mean and second moment of the first attempt age max(gamma, T), T ~ Exp(1).

    E[X]  = gamma + exp(-gamma)
    E[X^2] = gamma^2 + 2 (gamma + 1) exp(-gamma)
    """
    if not (isinstance(gamma, (int, float)) and math.isfinite(gamma) and gamma >= 0.0):
        raise ParameterError(f"threshold gamma must be finite and >= 0, got {gamma!r}")
    decay = math.exp(-gamma)
    return gamma + decay, gamma * gamma + 2.0 * (gamma + 1.0) * decay


def expected_epoch_length(gamma: float, params: ChannelParams) -> float:
    """Mean epoch length: first attempt age plus one unit-mean wait per retry."""
    _check_channel(params)
    mean, _ = first_attempt_moments(gamma)
    return mean + params.mean_retries


def expected_epoch_reward(gamma: float, params: ChannelParams) -> float:
    """Mean area under the age curve over one epoch.

    The retry tail contributes through the first two moments of the sum of
    the unit-mean waits accumulated after failed attempts.
    """
    _check_channel(params)
    mean, second = first_attempt_moments(gamma)
    retries = params.mean_retries
    return 0.5 * second + retries * mean + retries / (1.0 - params.q)


def optimal_threshold(lam: float, params: ChannelParams) -> float:
    """Threshold minimizing E[area] - lam * E[length]: max(lam - q/(1-q), 0)."""
    _check_channel(params)
    if not (isinstance(lam, (int, float)) and math.isfinite(lam) and lam >= 0.0):
        raise ParameterError(f"lambda must be finite and >= 0, got {lam!r}")
    return max(lam - params.mean_retries, 0.0)


def p_lambda(lam: float, params: ChannelParams) -> float:
    """Auxiliary function: best epoch area minus ``lam`` times epoch length.

    Piecewise in lam. Below the retry load q/(1-q) the best first attempt is
    greedy; above it, the best first attempt waits until the age reaches
    lam - q/(1-q). Strictly decreasing, continuous at the junction, and its
    unique root is the minimal long-run average age.
    """
    _check_channel(params)
    if not (isinstance(lam, (int, float)) and math.isfinite(lam) and lam >= 0.0):
        raise ParameterError(f"lambda must be finite and >= 0, got {lam!r}")
    q = params.q
    load = params.mean_retries
    tail = (2.0 * q - q * q) / ((1.0 - q) * (1.0 - q))
    if lam < load:
        return 1.0 - lam / (1.0 - q) + tail
    return math.exp(-(lam - load)) - 0.5 * lam * lam + 0.5 * tail


def solve_lambda_star(params: ChannelParams, tol: float = DEFAULT_TOL) -> DinkelbachSolution:
    """Bisect the auxiliary function above q/(1-q) until |p| <= tol.

    The lower end of the bracket has p = 1 + q/(1-q) > 0; the upper end is
    found by doubling the offset until p goes negative, which always happens
    because p eventually behaves like -lam^2/2.
    """
    _check_channel(params)
    _check_tol(tol)
    load = params.mean_retries
    lo = load
    offset = 1.0
    while p_lambda(load + offset, params) >= 0.0:
        offset *= 2.0
        if offset > 2**60:
            raise ConvergenceError("auxiliary function never went negative; bracket expansion failed")
    hi = load + offset

    lam = 0.5 * (lo + hi)
    residual = p_lambda(lam, params)
    iterations = 0
    while abs(residual) > tol:
        iterations += 1
        if iterations > MAX_ITERATIONS:
            raise ConvergenceError(
                f"bisection residual {abs(residual):.3e} still above {tol:.1e} "
                f"after {MAX_ITERATIONS} iterations"
            )
        if residual > 0.0:
            lo = lam
        else:
            hi = lam
        lam = 0.5 * (lo + hi)
        residual = p_lambda(lam, params)
    return DinkelbachSolution(
        lambda_star=lam,
        gamma_star=lam - load,
        residual=abs(residual),
        iterations=iterations,
        method="bisection",
    )


def solve_dinkelbach_iteration(params: ChannelParams, tol: float = DEFAULT_TOL) -> DinkelbachSolution:
    """Ratio iteration: lam <- E[area(threshold(lam))] / E[length(threshold(lam))].

    Starts from the greedy value 1/(1-q) and stops once successive iterates
    are within ``tol`` and the auxiliary residual is below ``tol`` as well,
    so both solvers certify the same root.
    """
    _check_channel(params)
    _check_tol(tol)
    load = params.mean_retries
    lam = 1.0 / (1.0 - params.q)
    trace = [lam]
    for iterations in range(1, MAX_ITERATIONS + 1):
        gamma = max(lam - load, 0.0)
        nxt = expected_epoch_reward(gamma, params) / expected_epoch_length(gamma, params)
        trace.append(nxt)
        step = abs(nxt - lam)
        lam = nxt
        residual = abs(p_lambda(lam, params))
        if step <= tol and residual <= tol:
            return DinkelbachSolution(
                lambda_star=lam,
                gamma_star=max(lam - load, 0.0),
                residual=residual,
                iterations=iterations,
                method="dinkelbach-iteration",
                trace=tuple(trace),
            )
    raise ConvergenceError(
        f"ratio iteration did not converge to tol={tol:.1e} within {MAX_ITERATIONS} steps"
    )


def infinite_battery_aoi(params: ChannelParams) -> float:
    """Average age achievable with unlimited energy storage: 1/(2(1-q)).

    Lower benchmark for the unit-battery optimum.
    """
    _check_channel(params)
    return 0.5 / (1.0 - params.q)


def no_feedback_mean_aoi(beta: float, params: ChannelParams) -> float:
    """Long-run average age of the blind spacing policy with spacing ``beta``.

    Without erasure feedback every attempt is spaced max(beta, wait for
    energy) after the previous one, so the gaps are i.i.d. with the same
    max(threshold, Exp(1)) moments as above, and an epoch is a geometric
    number of gaps. The average age is half the epoch's second moment over
    its mean. Serves as the independent oracle for the simulated baseline.
    """
    _check_channel(params)
    if not (isinstance(beta, (int, float)) and math.isfinite(beta) and beta >= 0.0):
        raise ParameterError(f"spacing beta must be finite and >= 0, got {beta!r}")
    gap_mean, gap_second = first_attempt_moments(beta)
    success = 1.0 - params.q
    # E[L] = E[Z]/p, E[L^2] = E[Z^2]/p + 2q/p^2 * E[Z]^2 for N ~ Geometric(p).
    epoch_mean = gap_mean / success
    epoch_second = gap_second / success + 2.0 * params.q / (success * success) * gap_mean * gap_mean
    return 0.5 * epoch_second / epoch_mean
