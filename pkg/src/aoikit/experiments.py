"""Reproduction experiments: the erasure-probability sweep and the feedback
gain study, both emitted as deterministic CSV.

The sweep solves for the optimal age and threshold on a grid of erasure
probabilities and confirms each optimum by simulation. The gain study tunes
the blind no-feedback baseline per grid point by golden-section search over
its spacing parameter on a common-random-number objective, then reports how
much the feedback optimum improves on it. Because the baseline is a
surrogate (the true no-feedback optimum is a different policy family), the
reported gain is an upper bound on the true gain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence, TextIO, Tuple, Union

from .analytic import DEFAULT_TOL, infinite_battery_aoi, solve_lambda_star
from .core import DEFAULT_SEED, ChannelParams, NoFeedbackThresholdPolicy, ParameterError, ThresholdGreedyPolicy
from .sim import ratio_mean_aoi

__all__ = [
    "DEFAULT_EPOCHS",
    "DEFAULT_Q_GRID",
    "GAIN_HEADER",
    "SWEEP_HEADER",
    "GainRow",
    "SweepRow",
    "format_value",
    "gain_study",
    "golden_section_search",
    "render_gain_csv",
    "render_sweep_csv",
    "sweep_q",
    "write_gain_csv",
    "write_sweep_csv",
]

DEFAULT_Q_GRID: Tuple[float, ...] = tuple(round(0.05 * i, 2) for i in range(1, 20))
DEFAULT_EPOCHS = 1_000_000
DEFAULT_BETA_SEARCH: Tuple[float, float, int] = (0.0, 5.0, 40)

SWEEP_HEADER = "q,lambda_star,gamma_star,sim_mean,sim_stderr,infinite_battery,greedy_value"
GAIN_HEADER = "q,aoi_no_feedback,beta_hat,lambda_star,gain"

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SweepRow:
    """One grid point of the age-versus-erasure-probability sweep."""

    q: float
    lambda_star: float
    gamma_star: float
    sim_mean: float
    sim_stderr: float
    infinite_battery: float
    greedy_value: float

    def as_csv(self) -> str:
        return ",".join(
            format_value(v)
            for v in (
                self.q,
                self.lambda_star,
                self.gamma_star,
                self.sim_mean,
                self.sim_stderr,
                self.infinite_battery,
                self.greedy_value,
            )
        )


@dataclass(frozen=True)
class GainRow:
    """One grid point of the feedback-gain study."""

    q: float
    aoi_no_feedback: float
    beta_hat: float
    lambda_star: float
    gain: float

    def as_csv(self) -> str:
        return ",".join(
            format_value(v)
            for v in (self.q, self.aoi_no_feedback, self.beta_hat, self.lambda_star, self.gain)
        )


def format_value(value: float) -> str:
    """Six significant digits; the one float format used in every report."""
    return f"{value:.6g}"


def _validated_grid(q_grid: Iterable[float]) -> Tuple[float, ...]:
    grid = tuple(float(q) for q in q_grid)
    if not grid:
        raise ParameterError("q grid is empty")
    for q in grid:
        if not 0.0 < q < 1.0:
            raise ParameterError(f"q grid contains {q!r}, outside (0, 1)")
    return grid


def golden_section_search(
    objective: Callable[[float], float],
    lower: float,
    upper: float,
    iterations: int = 40,
) -> Tuple[float, float]:
    """Minimize a unimodal(ish) objective on [lower, upper].

    Returns the best evaluated point and its value, never an unevaluated
    midpoint, so a noisy objective cannot report a value it was not asked
    for. The bracket endpoints are evaluated too, which keeps a minimum
    sitting exactly on the boundary (spacing 0 is optimal for high erasure
    rates) catchable.
    """
    if not (math.isfinite(lower) and math.isfinite(upper) and lower < upper):
        raise ParameterError(f"invalid search interval [{lower!r}, {upper!r}]")
    if iterations < 1:
        raise ParameterError(f"iterations must be >= 1, got {iterations!r}")
    a, b = lower, upper
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = objective(x1), objective(x2)
    best = min(((x1, f1), (x2, f2), (a, objective(a)), (b, objective(b))), key=lambda p: p[1])
    for _ in range(iterations):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = objective(x1)
            candidate = (x1, f1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = objective(x2)
            candidate = (x2, f2)
        if candidate[1] < best[1]:
            best = candidate
    return best


def sweep_q(
    q_grid: Iterable[float] = DEFAULT_Q_GRID,
    n_epochs: int = DEFAULT_EPOCHS,
    seed: int = DEFAULT_SEED,
    *,
    tol: float = DEFAULT_TOL,
    replicas: int = 1,
) -> list[SweepRow]:
    """Solve and then simulate the optimum at every erasure probability.

    Grid point i draws from streams ``stream_offset = i * replicas`` so the
    points are independent; rows come back ordered as given. Rerunning with
    the same arguments reproduces the rows exactly.
    """
    grid = _validated_grid(q_grid)
    rows = []
    for index, q in enumerate(grid):
        params = ChannelParams(q)
        solution = solve_lambda_star(params, tol)
        estimate = ratio_mean_aoi(
            ThresholdGreedyPolicy(solution.gamma_star),
            params,
            n_epochs,
            seed,
            replicas=replicas,
            stream_offset=index * replicas,
        )
        rows.append(
            SweepRow(
                q=q,
                lambda_star=solution.lambda_star,
                gamma_star=solution.gamma_star,
                sim_mean=estimate.mean_aoi,
                sim_stderr=estimate.stderr,
                infinite_battery=infinite_battery_aoi(params),
                greedy_value=1.0 / (1.0 - q),
            )
        )
    return rows


def gain_study(
    q_grid: Iterable[float] = DEFAULT_Q_GRID,
    beta_search: Tuple[float, float, int] = DEFAULT_BETA_SEARCH,
    n_epochs: int = DEFAULT_EPOCHS,
    seed: int = DEFAULT_SEED,
    *,
    tol: float = DEFAULT_TOL,
    replicas: int = 1,
) -> list[GainRow]:
    """Feedback gain per grid point: tuned blind baseline minus the optimum.

    ``beta_search`` is (lower, upper, iterations) for the golden-section
    search over the baseline's spacing. Every evaluation at one grid point
    reuses the same streams, so the noisy objective is effectively a smooth
    function of the spacing and the search is stable.
    """
    grid = _validated_grid(q_grid)
    lower, upper, iterations = beta_search
    rows = []
    for index, q in enumerate(grid):
        params = ChannelParams(q)
        solution = solve_lambda_star(params, tol)

        def objective(beta: float) -> float:
            return ratio_mean_aoi(
                NoFeedbackThresholdPolicy(beta),
                params,
                n_epochs,
                seed,
                replicas=replicas,
                stream_offset=index * replicas,
            ).mean_aoi

        beta_hat, aoi = golden_section_search(objective, lower, upper, iterations)
        rows.append(
            GainRow(
                q=q,
                aoi_no_feedback=aoi,
                beta_hat=beta_hat,
                lambda_star=solution.lambda_star,
                gain=aoi - solution.lambda_star,
            )
        )
    return rows


def render_sweep_csv(rows: Sequence[SweepRow]) -> str:
    """Sweep rows as CSV text: exact header, LF endings, 6 significant digits."""
    return "\n".join([SWEEP_HEADER, *(row.as_csv() for row in rows)]) + "\n"


def render_gain_csv(rows: Sequence[GainRow]) -> str:
    """Gain rows as CSV text with the fixed gain-study schema."""
    return "\n".join([GAIN_HEADER, *(row.as_csv() for row in rows)]) + "\n"


def _write_text(text: str, destination: Union[str, Path, TextIO]) -> None:
    if isinstance(destination, (str, Path)):
        # newline="" keeps the LF endings byte-exact on every platform
        with open(destination, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        destination.write(text)


def write_sweep_csv(rows: Sequence[SweepRow], destination: Union[str, Path, TextIO]) -> None:
    """Write :func:`render_sweep_csv` output to a path or open text stream."""
    _write_text(render_sweep_csv(rows), destination)


def write_gain_csv(rows: Sequence[GainRow], destination: Union[str, Path, TextIO]) -> None:
    """Write :func:`render_gain_csv` output to a path or open text stream."""
    _write_text(render_gain_csv(rows), destination)
