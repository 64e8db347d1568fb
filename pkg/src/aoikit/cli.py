"""Command-line front end: solve, simulate, sweep, gain.

Every invocation is reproducible: the seed defaults to the fixed constant
``DEFAULT_SEED`` (1729) rather than the clock, and all numeric output is
printed with six significant digits, so identical invocations emit identical
bytes.

Exit codes: 0 success, 2 usage or parameter error, 3 convergence or other
runtime failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence, TextIO

from .analytic import (
    DEFAULT_TOL,
    infinite_battery_aoi,
    solve_dinkelbach_iteration,
    solve_lambda_star,
)
from .core import DEFAULT_SEED, ChannelParams, ConvergenceError, ParameterError, resolve_policy
from .experiments import (
    DEFAULT_BETA_SEARCH,
    DEFAULT_EPOCHS,
    DEFAULT_Q_GRID,
    format_value,
    gain_study,
    render_gain_csv,
    render_sweep_csv,
    sweep_q,
)
from .sim import ratio_mean_aoi, simulate_timeline

__all__ = ["build_parser", "entrypoint", "main"]

USAGE_EXIT = 2
FAILURE_EXIT = 3


def _q_in_unit_interval(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"q must lie strictly between 0 and 1, got {text}")
    return value


def _q_grid(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"q grid must be comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("q grid is empty")
    return values


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--seed",
        type=int,
        default=DEFAULT_SEED,
        help=f"master seed for all random streams (default: {DEFAULT_SEED}, fixed for reproducibility)",
    )
    parser.add_argument(
        "--output",
        default=None,
        metavar="PATH",
        help="write the report to this file instead of stdout",
    )
    parser.add_argument(
        "--format",
        choices=("text", "csv", "json-lines"),
        default="text",
        help="report format (default: text; csv/json-lines are machine-readable)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aoikit",
        description=(
            "Optimal threshold scheduling of status updates from an "
            "energy-harvesting sensor over an erasure channel with feedback: "
            "analytic solver, stochastic simulators, and reproduction experiments."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser(
        "solve",
        help="compute the minimal long-run average age and its threshold",
        description=(
            "Solve for the minimal long-run average age (lambda_star), the "
            "threshold achieving it (gamma_star), and the benchmark values."
        ),
    )
    solve.add_argument("--q", type=_q_in_unit_interval, required=True, help="erasure probability in (0, 1)")
    solve.add_argument("--tol", type=float, default=DEFAULT_TOL, help=f"residual tolerance (default: {DEFAULT_TOL:g})")
    solve.add_argument(
        "--method",
        choices=("bisection", "dinkelbach-iteration"),
        default="bisection",
        help="root-finding method (default: bisection)",
    )
    _add_common(solve)

    simulate = sub.add_parser(
        "simulate",
        help="estimate the average age of a policy by simulation",
        description=(
            "Estimate a policy's long-run average age. By default the "
            "epoch-level renewal estimator runs for --epochs epochs; pass "
            "--horizon to run the event-driven timeline instead."
        ),
    )
    simulate.add_argument("--q", type=_q_in_unit_interval, required=True, help="erasure probability in (0, 1)")
    simulate.add_argument(
        "--policy",
        choices=("threshold-greedy", "greedy", "no-feedback"),
        default="threshold-greedy",
        help="update policy (default: threshold-greedy at the solved optimal threshold)",
    )
    simulate.add_argument(
        "--gamma",
        type=float,
        default=None,
        help="threshold override for threshold-greedy (default: the solved optimum)",
    )
    simulate.add_argument("--beta", type=float, default=None, help="spacing for the no-feedback policy (required with it)")
    simulate.add_argument(
        "--epochs",
        type=int,
        default=DEFAULT_EPOCHS,
        help=f"epochs for the renewal estimator (default: {DEFAULT_EPOCHS})",
    )
    simulate.add_argument(
        "--horizon",
        type=float,
        default=None,
        help="run the event-driven timeline for this many time units instead of the epoch estimator",
    )
    simulate.add_argument("--replicas", type=int, default=1, help="independent streams for the epoch estimator (default: 1)")
    simulate.add_argument("--tol", type=float, default=DEFAULT_TOL, help="tolerance for the implicit threshold solve")
    _add_common(simulate)

    sweep = sub.add_parser(
        "sweep",
        help="age and threshold versus erasure probability, as CSV",
        description="Solve and simulate the optimum on a grid of erasure probabilities.",
    )
    sweep.add_argument(
        "--q-grid",
        type=_q_grid,
        default=list(DEFAULT_Q_GRID),
        metavar="Q1,Q2,...",
        help="comma-separated erasure probabilities (default: 0.05 to 0.95 step 0.05)",
    )
    sweep.add_argument("--epochs", type=int, default=DEFAULT_EPOCHS, help=f"epochs per grid point (default: {DEFAULT_EPOCHS})")
    sweep.add_argument("--replicas", type=int, default=1, help="streams per grid point (default: 1)")
    sweep.add_argument("--tol", type=float, default=DEFAULT_TOL, help="solver tolerance")
    _add_common(sweep)

    gain = sub.add_parser(
        "gain",
        help="feedback gain versus erasure probability, as CSV",
        description=(
            "Tune the blind no-feedback baseline per grid point and report "
            "its best simulated age minus the feedback optimum."
        ),
    )
    gain.add_argument(
        "--q-grid",
        type=_q_grid,
        default=list(DEFAULT_Q_GRID),
        metavar="Q1,Q2,...",
        help="comma-separated erasure probabilities (default: 0.05 to 0.95 step 0.05)",
    )
    gain.add_argument("--epochs", type=int, default=DEFAULT_EPOCHS, help=f"epochs per objective evaluation (default: {DEFAULT_EPOCHS})")
    gain.add_argument("--beta-max", type=float, default=DEFAULT_BETA_SEARCH[1], help="upper end of the spacing search (default: 5)")
    gain.add_argument(
        "--search-iterations",
        type=int,
        default=DEFAULT_BETA_SEARCH[2],
        help=f"golden-section iterations (default: {DEFAULT_BETA_SEARCH[2]})",
    )
    gain.add_argument("--replicas", type=int, default=1, help="streams per grid point (default: 1)")
    gain.add_argument("--tol", type=float, default=DEFAULT_TOL, help="solver tolerance")
    _add_common(gain)

    return parser


def _emit(text: str, output: Optional[str], stdout: TextIO) -> None:
    if output is None:
        stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _kv_lines(pairs: list[tuple[str, object]]) -> str:
    lines = []
    for key, value in pairs:
        rendered = format_value(value) if isinstance(value, float) else str(value)
        lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"


def _csv_lines(pairs: list[tuple[str, object]]) -> str:
    header = ",".join(key for key, _ in pairs)
    row = ",".join(format_value(v) if isinstance(v, float) else str(v) for _, v in pairs)
    return f"{header}\n{row}\n"


def _json_line(pairs: list[tuple[str, object]]) -> str:
    payload = {
        key: float(format_value(value)) if isinstance(value, float) else value
        for key, value in pairs
    }
    return json.dumps(payload, sort_keys=False) + "\n"


def _render_pairs(pairs: list[tuple[str, object]], fmt: str) -> str:
    if fmt == "csv":
        return _csv_lines(pairs)
    if fmt == "json-lines":
        return _json_line(pairs)
    return _kv_lines(pairs)


def _cmd_solve(args: argparse.Namespace, stdout: TextIO) -> int:
    params = ChannelParams(args.q)
    solver = solve_lambda_star if args.method == "bisection" else solve_dinkelbach_iteration
    solution = solver(params, args.tol)
    pairs = [
        ("q", float(args.q)),
        ("lambda_star", solution.lambda_star),
        ("gamma_star", solution.gamma_star),
        ("residual", solution.residual),
        ("iterations", solution.iterations),
        ("method", solution.method),
        ("infinite_battery", infinite_battery_aoi(params)),
        ("greedy_value", 1.0 / (1.0 - args.q)),
    ]
    _emit(_render_pairs(pairs, args.format), args.output, stdout)
    return 0


def _cmd_simulate(args: argparse.Namespace, stdout: TextIO) -> int:
    params = ChannelParams(args.q)
    gamma = args.gamma
    if args.policy == "threshold-greedy" and gamma is None:
        gamma = solve_lambda_star(params, args.tol).gamma_star
    if args.policy == "no-feedback" and args.beta is None:
        raise ParameterError("--beta is required with --policy no-feedback")
    policy = resolve_policy(args.policy, gamma=gamma, beta=args.beta)

    if args.horizon is not None:
        estimate = simulate_timeline(policy, params, args.horizon, args.seed)
        extent = ("horizon", float(args.horizon))
    else:
        estimate = ratio_mean_aoi(policy, params, args.epochs, args.seed, replicas=args.replicas)
        extent = ("epochs", args.epochs)
    pairs = [
        ("policy", estimate.policy_descriptor),
        ("q", float(args.q)),
        ("mean_aoi", estimate.mean_aoi),
        ("stderr", estimate.stderr),
        extent,
        ("seed", args.seed),
    ]
    _emit(_render_pairs(pairs, args.format), args.output, stdout)
    return 0


def _rows_as_json_lines(rows, fields: Sequence[str]) -> str:
    lines = []
    for row in rows:
        payload = {name: float(format_value(getattr(row, name))) for name in fields}
        lines.append(json.dumps(payload, sort_keys=False))
    return "\n".join(lines) + "\n"


def _cmd_sweep(args: argparse.Namespace, stdout: TextIO) -> int:
    rows = sweep_q(args.q_grid, args.epochs, args.seed, tol=args.tol, replicas=args.replicas)
    if args.format == "json-lines":
        text = _rows_as_json_lines(
            rows,
            ("q", "lambda_star", "gamma_star", "sim_mean", "sim_stderr", "infinite_battery", "greedy_value"),
        )
    else:
        text = render_sweep_csv(rows)
    _emit(text, args.output, stdout)
    return 0


def _cmd_gain(args: argparse.Namespace, stdout: TextIO) -> int:
    rows = gain_study(
        args.q_grid,
        (0.0, args.beta_max, args.search_iterations),
        args.epochs,
        args.seed,
        tol=args.tol,
        replicas=args.replicas,
    )
    if args.format == "json-lines":
        text = _rows_as_json_lines(rows, ("q", "aoi_no_feedback", "beta_hat", "lambda_star", "gain"))
    else:
        text = render_gain_csv(rows)
    _emit(text, args.output, stdout)
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "gain": _cmd_gain,
}


def main(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None) -> int:
    """Run the CLI; returns the exit code instead of raising SystemExit."""
    stdout = stdout if stdout is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args, stdout)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (ConvergenceError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE_EXIT


def entrypoint() -> None:
    """Console-script shim."""
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
