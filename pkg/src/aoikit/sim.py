"""Stochastic ground truth for the analytic results.

Two estimators of the long-run average age:

* an epoch-level renewal sampler (`simulate_epoch` / `ratio_mean_aoi`) that
  exploits the i.i.d. epoch structure, and
* a full event-driven timeline (`simulate_timeline`) that walks arrivals and
  attempts one by one, enforcing battery causality at every event.

Both are deterministic given a seed and the documented stream layout, so any
reported number can be replayed bit for bit.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import (
    ChannelParams,
    EpochOutcome,
    NoFeedbackThresholdPolicy,
    ParameterError,
    Policy,
    RngStream,
    ThresholdGreedyPolicy,
    TimelineState,
    draw_erasure,
    draw_exponential,
    draw_exponentials,
    resolve_policy,
)

__all__ = [
    "MIN_EPOCHS",
    "MIN_HORIZON",
    "SimEstimate",
    "TimelineResult",
    "ratio_mean_aoi",
    "run_timeline",
    "simulate_epoch",
    "simulate_timeline",
]

MIN_EPOCHS = 1_000
MIN_HORIZON = 1e4


def _check_channel(params: ChannelParams) -> None:
    if not 0.0 < params.q < 1.0:
        raise ParameterError(f"simulation requires q in (0, 1), got {params.q!r}")


@dataclass(frozen=True)
class SimEstimate:
    """A simulated mean-age estimate with its standard error."""

    mean_aoi: float
    stderr: float
    epochs_or_horizon: float
    seed: int
    policy_descriptor: str

    def __post_init__(self) -> None:
        if not self.mean_aoi > 0.0:
            raise ParameterError(f"mean age must be positive, got {self.mean_aoi!r}")
        if not self.stderr > 0.0:
            raise ParameterError(f"standard error must be positive, got {self.stderr!r}")


def simulate_epoch(policy: ThresholdGreedyPolicy, params: ChannelParams, rng: RngStream) -> EpochOutcome:
    """One renewal epoch under the threshold-greedy policy.

    Per attempt the stream is consumed as (wait, erasure flag), so replaying
    the same stream reproduces the epoch exactly. The epoch ends at the
    first successful attempt; the age rises linearly from 0 to the epoch
    length, hence reward = length^2 / 2.
    """
    if not isinstance(policy, ThresholdGreedyPolicy):
        raise ParameterError(f"epoch simulation expects a threshold-greedy policy, got {type(policy).__name__}")
    _check_channel(params)
    length = policy.first_attempt_age(draw_exponential(rng))
    attempts = 1
    while draw_erasure(rng, params):
        length += draw_exponential(rng)
        attempts += 1
    return EpochOutcome(length=length, reward=0.5 * length * length, attempts=attempts)


def _sample_epoch_lengths(policy: Policy, params: ChannelParams, n: int, rng: RngStream) -> np.ndarray:
    """Epoch lengths for n epochs, sampled wave by wave.

    Wave w draws the wait and then the erasure flag for every epoch still
    unresolved after w attempts. Erasure draws are therefore consumed in
    attempt order, and the attempt pattern for a given stream does not
    depend on the policy parameter, which makes estimates at different
    thresholds share their noise (common random numbers).
    """
    q = params.q
    if isinstance(policy, ThresholdGreedyPolicy):
        lengths = np.maximum(policy.gamma, draw_exponentials(rng, n))
        respace = None
    elif isinstance(policy, NoFeedbackThresholdPolicy):
        lengths = np.maximum(policy.beta, draw_exponentials(rng, n))
        respace = policy.beta
    else:
        raise ParameterError(f"unsupported policy type {type(policy).__name__}")
    live = np.nonzero(rng.uniforms(n) < q)[0]
    while live.size:
        waits = draw_exponentials(rng, live.size)
        if respace is not None:
            waits = np.maximum(respace, waits)
        lengths[live] += waits
        live = live[rng.uniforms(live.size) < q]
    return lengths


def _power_sums(lengths: np.ndarray) -> np.ndarray:
    """(n, sum L, sum L^2, sum L^3, sum L^4); rewards are powers of L."""
    l2 = lengths * lengths
    return np.array(
        [lengths.size, lengths.sum(), l2.sum(), (l2 * lengths).sum(), (l2 * l2).sum()]
    )


def _ratio_estimate_from_sums(sums: np.ndarray) -> tuple[float, float]:
    """Ratio-of-means estimate and its delta-method standard error.

    With reward R = L^2/2 the estimate is theta = sum(L^2) / (2 sum(L)) and

        SE^2 = (Var R - 2 theta Cov(R, L) + theta^2 Var L) / (n * mean(L)^2)

    using unbiased sample moments.
    """
    n, s1, s2, s3, s4 = sums
    if n < 2:
        raise ParameterError("need at least two epochs for a standard error")
    mean_l = s1 / n
    mean_r = 0.5 * s2 / n
    theta = mean_r / mean_l
    var_l = (s2 - n * mean_l * mean_l) / (n - 1)
    var_r = (0.25 * s4 - n * mean_r * mean_r) / (n - 1)
    cov_rl = (0.5 * s3 - n * mean_r * mean_l) / (n - 1)
    se2 = (var_r - 2.0 * theta * cov_rl + theta * theta * var_l) / (n * mean_l * mean_l)
    return float(theta), float(math.sqrt(max(se2, 0.0)))


def ratio_mean_aoi(
    policy: Policy,
    params: ChannelParams,
    n_epochs: int,
    seed: int,
    *,
    replicas: int = 1,
    stream_offset: int = 0,
) -> SimEstimate:
    """Renewal-reward estimate of the long-run average age.

    The estimate is (sum of epoch rewards) / (sum of epoch lengths). Epochs
    are split across ``replicas`` streams, replica i drawing from
    ``RngStream(seed, stream_offset + i)`` with the first ``n % replicas``
    replicas one epoch larger. Replicas may execute concurrently; the merge
    is by replica index, so the result depends only on this layout, never on
    execution order.
    """
    _check_channel(params)
    if n_epochs < MIN_EPOCHS:
        raise ParameterError(f"need at least {MIN_EPOCHS} epochs, got {n_epochs!r}")
    if not 1 <= replicas <= n_epochs:
        raise ParameterError(f"replicas must be in [1, n_epochs], got {replicas!r}")

    base, extra = divmod(n_epochs, replicas)
    counts = [base + 1 if i < extra else base for i in range(replicas)]

    def one_replica(index: int) -> np.ndarray:
        rng = RngStream(seed, stream_id=stream_offset + index)
        return _power_sums(_sample_epoch_lengths(policy, params, counts[index], rng))

    if replicas == 1:
        parts = [one_replica(0)]
    else:
        with ThreadPoolExecutor(max_workers=replicas) as pool:
            parts = list(pool.map(one_replica, range(replicas)))

    totals = parts[0].copy()
    for part in parts[1:]:
        totals += part
    mean, stderr = _ratio_estimate_from_sums(totals)
    return SimEstimate(
        mean_aoi=mean,
        stderr=stderr,
        epochs_or_horizon=float(n_epochs),
        seed=seed,
        policy_descriptor=policy.describe(),
    )


@dataclass(frozen=True)
class TimelineResult:
    """Full outcome of an event-driven run, estimate plus diagnostics."""

    estimate: SimEstimate
    events: int
    arrivals: int
    discarded_arrivals: int
    attempts: int
    successes: int
    state: TimelineState


def run_timeline(
    policy: Union[Policy, str],
    params: ChannelParams,
    horizon: float,
    seed: int,
    *,
    gamma: Optional[float] = None,
    beta: Optional[float] = None,
    stream_id: int = 0,
    include_partial_tail: bool = True,
) -> TimelineResult:
    """Walk the system event by event from t = 0 to the horizon.

    Events are energy arrivals (Poisson, unit rate; an arrival on a full
    battery is discarded) and attempts scheduled by the policy. Every
    attempt requires a charged battery immediately before it and empties it;
    that causality is checked at each event and a violation raises rather
    than being silently repaired.

    The returned mean is area/horizon including the partial epoch after the
    last success, matching the definition of the age area; with
    ``include_partial_tail=False`` the run is truncated at the last success
    and the mean is taken over completed epochs only. The standard error
    always comes from the completed epochs, treated as renewal samples.

    ``policy`` may be a policy object or a descriptor string
    ("threshold-greedy" / "greedy" / "no-feedback") with gamma or beta.
    """
    if isinstance(policy, str):
        policy = resolve_policy(policy, gamma=gamma, beta=beta)
    _check_channel(params)
    if not horizon >= MIN_HORIZON:
        raise ParameterError(f"horizon must be at least {MIN_HORIZON:g}, got {horizon!r}")

    rng = RngStream(seed, stream_id=stream_id)
    feedback = isinstance(policy, ThresholdGreedyPolicy)
    state = TimelineState()
    next_arrival = draw_exponential(rng)
    next_attempt = math.inf
    awaiting_first = True  # feedback policies: next attempt opens an epoch
    arrivals = discarded = attempts = 0
    epoch_sums = np.zeros(5)

    while True:
        event_time = min(next_arrival, next_attempt)
        if event_time >= horizon:
            break
        if next_attempt <= next_arrival:
            state.now = next_attempt
            if state.battery != 1:
                raise RuntimeError(f"attempt at t={state.now} with battery={state.battery}")
            state.battery = 0
            state.last_attempt = state.now
            attempts += 1
            next_attempt = math.inf
            if draw_erasure(rng, params):
                awaiting_first = False
            else:
                length = state.now - state.last_success
                state.age_area += 0.5 * length * length
                state.successes += 1
                state.last_success = state.now
                awaiting_first = True
                epoch_sums += (1.0, length, length**2, length**3, length**4)
        else:
            state.now = next_arrival
            arrivals += 1
            if state.battery == 1:
                discarded += 1
            else:
                state.battery = 1
                if feedback:
                    if awaiting_first:
                        next_attempt = max(state.now, state.last_success + policy.gamma)
                    else:
                        next_attempt = state.now
                else:
                    reference = state.last_attempt if state.last_attempt is not None else 0.0
                    next_attempt = max(state.now, reference + policy.beta)
            next_arrival = state.now + draw_exponential(rng)
        if state.battery not in (0, 1):
            raise RuntimeError(f"battery left {{0,1}} at t={state.now}: {state.battery}")

    state.now = horizon
    if state.successes == 0:
        raise RuntimeError(f"no successful delivery within horizon {horizon:g}; cannot estimate")
    _, stderr = _ratio_estimate_from_sums(epoch_sums)
    if include_partial_tail:
        tail = horizon - state.last_success
        mean = (state.age_area + 0.5 * tail * tail) / horizon
    else:
        mean = state.age_area / state.last_success
    estimate = SimEstimate(
        mean_aoi=mean,
        stderr=stderr,
        epochs_or_horizon=float(horizon),
        seed=seed,
        policy_descriptor=policy.describe(),
    )
    return TimelineResult(
        estimate=estimate,
        events=arrivals + attempts,
        arrivals=arrivals,
        discarded_arrivals=discarded,
        attempts=attempts,
        successes=state.successes,
        state=state,
    )


def simulate_timeline(
    policy: Union[Policy, str],
    params: ChannelParams,
    horizon: float,
    seed: int,
    *,
    gamma: Optional[float] = None,
    beta: Optional[float] = None,
    stream_id: int = 0,
    include_partial_tail: bool = True,
) -> SimEstimate:
    """Event-driven estimate of the long-run average age; see :func:`run_timeline`."""
    return run_timeline(
        policy,
        params,
        horizon,
        seed,
        gamma=gamma,
        beta=beta,
        stream_id=stream_id,
        include_partial_tail=include_partial_tail,
    ).estimate
