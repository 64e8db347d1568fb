"""Domain types, update policies, and the reproducible-randomness contract.

Everything downstream (closed forms, simulators, experiments) builds on this
module. Types are immutable values or single-owner mutable state; the only
thing that must not be shared across threads is an RngStream, so parallel
work hands each worker its own stream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

__all__ = [
    "DEFAULT_SEED",
    "ChannelParams",
    "ConvergenceError",
    "EpochOutcome",
    "NoFeedbackThresholdPolicy",
    "ParameterError",
    "Policy",
    "RngStream",
    "ThresholdGreedyPolicy",
    "TimelineState",
    "draw_erasure",
    "draw_exponential",
    "draw_exponentials",
    "exponential_from_uniform",
    "resolve_policy",
]

# Fixed default so bare invocations (CLI, experiments) are reproducible.
DEFAULT_SEED = 1729


class ParameterError(ValueError):
    """A parameter lies outside its documented domain."""


class ConvergenceError(RuntimeError):
    """An iterative routine exhausted its budget without meeting tolerance."""


@dataclass(frozen=True)
class ChannelParams:
    """Erasure channel fed by Poisson energy arrivals of unit rate.

    Each transmission attempt is erased independently with probability ``q``.
    The arrival rate is a field only to make the normalization explicit;
    anything other than 1 is rejected.
    """

    q: float
    rate: float = 1.0

    def __post_init__(self) -> None:
        if not (isinstance(self.q, (int, float)) and 0.0 < self.q < 1.0):
            raise ParameterError(f"erasure probability must lie in (0, 1), got {self.q!r}")
        if self.rate != 1.0:
            raise ParameterError("energy arrival rate is normalized to 1")

    @property
    def mean_retries(self) -> float:
        """Expected number of failed attempts per epoch, q/(1-q)."""
        return self.q / (1.0 - self.q)

    @classmethod
    def degenerate(cls, q: float) -> "ChannelParams":
        """Channel allowing q at the endpoints 0 and 1.

        Only the draw primitives accept such a channel; solvers and
        simulators reject anything outside the open interval. Exists so
        tests can pin down the q = 0 / q = 1 behaviour of the erasure draw.
        """
        if not 0.0 <= q <= 1.0:
            raise ParameterError(f"erasure probability must lie in [0, 1], got {q!r}")
        params = object.__new__(cls)
        object.__setattr__(params, "q", float(q))
        object.__setattr__(params, "rate", 1.0)
        return params


@dataclass(frozen=True)
class ThresholdGreedyPolicy:
    """Hold the first attempt of an epoch until the age reaches ``gamma``.

    After a success the age restarts from zero; the next attempt fires once
    energy is available *and* the age is at least gamma. Every attempt after
    a failure fires immediately on the next energy arrival, since the age is
    already above the threshold at that point.
    """

    gamma: float

    def __post_init__(self) -> None:
        if not (isinstance(self.gamma, (int, float)) and math.isfinite(self.gamma) and self.gamma >= 0.0):
            raise ParameterError(f"threshold gamma must be finite and >= 0, got {self.gamma!r}")

    def first_attempt_age(self, first_arrival: float) -> float:
        """Age at which the epoch's first attempt fires: max(gamma, arrival)."""
        return self.gamma if first_arrival < self.gamma else first_arrival

    def describe(self) -> str:
        return f"threshold-greedy(gamma={self.gamma:.6g})"


@dataclass(frozen=True)
class NoFeedbackThresholdPolicy:
    """Blind spacing policy: attempt when charged and ``beta`` has elapsed
    since the previous attempt (since t = 0 for the first attempt ever).

    Surrogate baseline for a sensor that never learns erasure outcomes; it
    cannot switch to greedy retransmission because it does not know an
    attempt failed.
    """

    beta: float

    def __post_init__(self) -> None:
        if not (isinstance(self.beta, (int, float)) and math.isfinite(self.beta) and self.beta >= 0.0):
            raise ParameterError(f"spacing beta must be finite and >= 0, got {self.beta!r}")

    def describe(self) -> str:
        return f"no-feedback(beta={self.beta:.6g})"


Policy = Union[ThresholdGreedyPolicy, NoFeedbackThresholdPolicy]


def resolve_policy(
    name: str,
    *,
    gamma: Optional[float] = None,
    beta: Optional[float] = None,
) -> Policy:
    """Turn a descriptor string into a policy object.

    ``greedy`` is threshold-greedy with a zero threshold; a nonzero gamma
    alongside it is rejected rather than silently ignored.
    """
    if name == "threshold-greedy":
        if gamma is None:
            raise ParameterError("threshold-greedy requires gamma")
        return ThresholdGreedyPolicy(float(gamma))
    if name == "greedy":
        if gamma not in (None, 0, 0.0):
            raise ParameterError("greedy means gamma = 0; drop the gamma argument")
        return ThresholdGreedyPolicy(0.0)
    if name in ("no-feedback", "no-feedback-threshold"):
        if beta is None:
            raise ParameterError("no-feedback requires beta")
        return NoFeedbackThresholdPolicy(float(beta))
    raise ParameterError(f"unknown policy descriptor {name!r}")


@dataclass(frozen=True)
class EpochOutcome:
    """One renewal interval between consecutive successful deliveries."""

    length: float
    reward: float
    attempts: int

    def __post_init__(self) -> None:
        if not self.length > 0.0:
            raise ParameterError(f"epoch length must be positive, got {self.length!r}")
        if self.attempts < 1:
            raise ParameterError(f"an epoch contains at least one attempt, got {self.attempts!r}")
        # Zero service time makes the age a sawtooth, so the area is exact.
        expected = 0.5 * self.length * self.length
        if abs(self.reward - expected) > 1e-12 * max(expected, 1.0):
            raise ParameterError(
                f"epoch reward {self.reward!r} inconsistent with length^2/2 = {expected!r}"
            )


@dataclass
class TimelineState:
    """Mutable state advanced event by event by the timeline simulator.

    Starts with an empty battery and a fresh destination (age 0).
    """

    now: float = 0.0
    battery: int = 0
    last_success: float = 0.0
    age_area: float = 0.0
    successes: int = 0
    last_attempt: Optional[float] = None

    @property
    def age(self) -> float:
        """Time since the most recent successful delivery."""
        return self.now - self.last_success


class RngStream:
    """Reproducible uniform source.

    The same ``(seed, stream_id)`` pair yields the same draw sequence on any
    platform; distinct stream ids derive statistically independent streams
    from the same master seed. Instances hold mutable generator state and
    must not be shared between threads.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        seed = int(seed)
        stream_id = int(stream_id)
        if not 0 <= seed < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
        if stream_id < 0:
            raise ParameterError(f"stream_id must be >= 0, got {stream_id!r}")
        self.seed = seed
        self.stream_id = stream_id
        sequence = np.random.SeedSequence(seed, spawn_key=(stream_id,))
        self._gen = np.random.Generator(np.random.PCG64(sequence))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def uniform(self) -> float:
        """One uniform draw in [0, 1)."""
        return float(self._gen.random())

    def uniform_open(self) -> float:
        """One uniform draw in the open interval (0, 1).

        The generator already excludes 1; an exact 0 (probability 2**-53)
        is redrawn so downstream inverse-CDF transforms stay finite.
        """
        u = self._gen.random()
        while u == 0.0:
            u = self._gen.random()
        return float(u)

    def uniforms(self, n: int) -> np.ndarray:
        """Vector of n uniform draws in [0, 1), in draw order."""
        return self._gen.random(n)

    def uniforms_open(self, n: int) -> np.ndarray:
        """Vector of n uniform draws in (0, 1), in draw order."""
        u = self._gen.random(n)
        zero = u == 0.0
        while zero.any():
            u[zero] = self._gen.random(int(zero.sum()))
            zero = u == 0.0
        return u


def exponential_from_uniform(u: float) -> float:
    """Inverse-CDF map from a uniform in (0, 1) to a unit-mean exponential."""
    return -math.log(u)


def draw_exponential(rng: RngStream) -> float:
    """One unit-rate exponential inter-arrival time, t = -ln(u)."""
    return exponential_from_uniform(rng.uniform_open())


def draw_exponentials(rng: RngStream, n: int) -> np.ndarray:
    """Vector form of :func:`draw_exponential`; one uniform per element."""
    return -np.log(rng.uniforms_open(n))


def draw_erasure(rng: RngStream, params: ChannelParams) -> bool:
    """True when the attempt is erased; happens with probability q.

    Consumes exactly one uniform, so draw order stays auditable. The
    half-open uniform makes q = 0 never erase and q = 1 always erase.
    """
    return rng.uniform() < params.q
