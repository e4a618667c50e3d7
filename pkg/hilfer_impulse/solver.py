"""
Mild solutions of impulsive Hilfer systems, built interval by interval.

On each active interval (t_i, end] the weighted state y = (t - t_i)^{1-lam} x
satisfies the Volterra equation

    y(t) = c_i + (t - t_i)^{1-lam} / Gamma(mu) * int_{t_i}^t (t - s)^{mu-1} g(s, x(s)) ds

which is discretised by product integration on a graded mesh, writing
g(s, x(s)) = (s - t_i)^{lam-1} * ghat(s) with ghat linear between nodes,
and advanced node by node with Picard iteration. Impulse windows solve the
algebraic equation x = phi_i(t, x, x(p_i - 0)) at every node.
"""

import logging
import math
import time
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from hilfer_impulse.exceptions import (
    ConvergenceError,
    DomainError,
    GridError,
    ImpulseConvergenceError,
)
from hilfer_impulse.expr import Expr
from hilfer_impulse.fraccalc import SampledFn, frac_integral_quad, graded_grid, kernel_weights
from hilfer_impulse.graph import State, StateGraph
from hilfer_impulse.special import gamma
from hilfer_impulse.systems import ImpulsiveSystem, Interval, MeshSpec, Mode

logger = logging.getLogger(__name__)

PICARD_TOLERANCE = 1e-10
PICARD_MAX_ITERATIONS = 100
IMPULSE_DAMPING = 0.5
IMPULSE_TOLERANCE = 1e-12
IMPULSE_MAX_ITERATIONS = 200
IMPULSE_SECANT_AFTER = 50


@dataclass(frozen=True, eq=False)
class Segment:
    """
    One piece of a solved trajectory. Active segments store weighted values
    (t - lower)^{1-weight} x(t), with weighted_values[0] == restart_value;
    impulse windows and point impulses store x itself (weight 1).
    """

    kind: str
    index: int
    lower: float
    weight: float
    grid: np.ndarray
    weighted_values: np.ndarray
    restart_value: float

    def __post_init__(self):
        for name in ("grid", "weighted_values"):
            array = np.array(getattr(self, name), dtype=float)
            array.flags.writeable = False
            object.__setattr__(self, name, array)

    @property
    def upper(self) -> float:
        return float(self.grid[-1])

    @property
    def values(self) -> np.ndarray:
        """
        Unweighted x on the grid. Infinite at an active lower bound when
        the weight is below 1 and the restart value is nonzero.
        """
        if self.kind != "active" or self.weight == 1:
            return self.weighted_values.copy()
        sigma = self.grid - self.lower
        with np.errstate(divide="ignore", invalid="ignore"):
            values = sigma ** (self.weight - 1) * self.weighted_values
        values[0] = math.copysign(math.inf, self.restart_value) if self.restart_value else 0.0
        return values

    def weighted_at(self, t: float) -> float:
        return float(np.interp(t, self.grid, self.weighted_values))

    def at(self, t: float) -> float:
        """
        Unweighted x(t), interpolating the stored representation.
        """
        if not self.lower <= t <= self.upper:
            raise GridError(f"t={t:g} is outside {self.kind} segment {self.index}")
        if self.kind == "active":
            if t == self.lower:
                return float(self.values[0])
            return (t - self.lower) ** (self.weight - 1) * self.weighted_at(t)
        # Window grids start after their lower point; interp holds the first node
        return self.weighted_at(t)

    def as_sampled(self) -> SampledFn:
        return SampledFn(self.lower, self.grid, self.weighted_values, self.weight)


@dataclass(frozen=True)
class PiecewiseTrajectory:
    segments: tuple[Segment, ...]

    def __iter__(self):
        return iter(self.segments)

    def __len__(self):
        return len(self.segments)

    def of_kind(self, kind: str) -> list[Segment]:
        return [segment for segment in self.segments if segment.kind == kind]

    def segment_at(self, t: float) -> Segment:
        """
        The segment whose half-open interval (lower, upper] contains t. A
        point impulse owns its single instant.
        """
        found = None
        for segment in self.segments:
            if segment.kind == "point_impulse" and t == segment.lower:
                return segment
            if segment.lower < t <= segment.upper:
                found = segment
        if found is None:
            first = self.segments[0]
            if t == first.lower:
                return first
            raise GridError(f"t={t:g} is outside the trajectory")
        return found

    def at(self, t: float) -> float:
        return self.segment_at(t).at(t)

    def max_abs(self) -> float:
        """
        Largest |x| over the stored points, skipping singular lower bounds.
        """
        largest = 0.0
        for segment in self.segments:
            values = segment.values
            finite = values[np.isfinite(values)]
            if len(finite):
                largest = max(largest, float(np.max(np.abs(finite))))
        return largest


@dataclass
class SolveRun:
    """
    Mutable state of one solve as it walks the segment graph.
    """

    system: ImpulsiveSystem
    mesh: MeshSpec
    pieces: list[Interval]
    position: int = 0
    restart: float = 0.0
    left_limit: float = 0.0
    segments: list[Segment] = field(default_factory=list)

    @property
    def piece(self) -> Interval:
        return self.pieces[self.position]

    def advance(self) -> str:
        """
        Moves to the next piece and returns its kind, or "finished".
        """
        self.position += 1
        if self.position >= len(self.pieces):
            return "finished"
        return self.pieces[self.position].kind


def _evaluate(expression: Expr, where: str, **bindings: float) -> float:
    try:
        return expression(**bindings)
    except DomainError as error:
        raise DomainError(f"{error} at t={bindings['t']:g} in {where}") from error


def solve_active(run: SolveRun) -> Segment:
    system = run.system
    piece = run.piece
    mu = system.order.mu
    lam = system.order.lam
    n = run.mesh.points_per_interval
    sigma = graded_grid(0.0, piece.upper - piece.lower, n, run.mesh.grading_for(system.order))
    grid = piece.lower + sigma
    weights = kernel_weights(sigma, mu, lam)
    where = f"active interval {piece.index}"
    scale = np.empty_like(sigma)
    scale[0] = 0.0
    scale[1:] = sigma[1:] ** (1 - lam) / gamma(mu)
    c = run.restart
    y = np.empty(n + 1)
    g_hat = np.zeros(n + 1)
    y[0] = c

    def weighted_rhs(k: int, value: float) -> float:
        if lam == 1:
            return _evaluate(system.g, where, t=grid[k], x=value)
        x = sigma[k] ** (lam - 1) * value
        return sigma[k] ** (1 - lam) * _evaluate(system.g, where, t=grid[k], x=x)

    if lam == 1:
        g_hat[0] = weighted_rhs(0, c)
    for k in range(1, n + 1):
        if k == 1 and lam < 1:
            # ghat has no value at the singular point; hold it constant on the first cell
            history = 0.0
            self_weight = weights[1, 0] + weights[1, 1]
        else:
            history = float(weights[k, :k] @ g_hat[:k])
            self_weight = weights[k, k]
        value = y[k - 1]
        for iteration in range(1, PICARD_MAX_ITERATIONS + 1):
            rhs = weighted_rhs(k, value)
            updated = c + scale[k] * (history + self_weight * rhs)
            if not math.isfinite(updated):
                raise ConvergenceError(
                    f"Picard iteration diverged at t={grid[k]:g}",
                    (piece.lower, piece.upper),
                    iteration,
                )
            converged = abs(updated - value) <= PICARD_TOLERANCE * max(1.0, abs(updated))
            value = updated
            if converged:
                break
        else:
            raise ConvergenceError(
                f"Picard iteration did not converge at t={grid[k]:g}",
                (piece.lower, piece.upper),
                PICARD_MAX_ITERATIONS,
            )
        y[k] = value
        g_hat[k] = weighted_rhs(k, value)
        if k == 1 and lam < 1:
            g_hat[0] = g_hat[1]
    return Segment("active", piece.index, piece.lower, lam, grid, y, c)


def solve_impulse_point(
    impulse_map: Expr, t: float, y: float, where: str, start: float | None = None
) -> float:
    """
    Solves x = phi(t, x, y) by damped fixed-point iteration, switching to
    the secant method on phi - x if damping has not settled.
    """
    guess = y if start is None else start
    previous = None
    for iteration in range(1, IMPULSE_MAX_ITERATIONS + 1):
        residual = _evaluate(impulse_map, where, t=t, x=guess, y=y) - guess
        if abs(residual) <= IMPULSE_TOLERANCE * max(1.0, abs(guess)):
            return guess
        if iteration <= IMPULSE_SECANT_AFTER or previous is None:
            following = guess + IMPULSE_DAMPING * residual
        else:
            last_guess, last_residual = previous
            slope = (residual - last_residual) / (guess - last_guess) if guess != last_guess else 0.0
            if slope == 0:
                following = guess + IMPULSE_DAMPING * residual
            else:
                following = guess - residual / slope
        previous = (guess, residual)
        guess = following
        if not math.isfinite(guess):
            break
    raise ImpulseConvergenceError(
        f"Impulse equation did not converge at t={t:g}",
        (t, t),
        iteration,
    )


def solve_window(run: SolveRun) -> Segment:
    system = run.system
    piece = run.piece
    impulse_map = system.impulse_maps[piece.index]
    grid = np.linspace(piece.lower, piece.upper, run.mesh.points_per_interval + 1)[1:]
    where = f"impulse window {piece.index}"
    values = np.empty_like(grid)
    guess = run.left_limit
    for k, t in enumerate(grid):
        try:
            guess = solve_impulse_point(impulse_map, t, run.left_limit, where, start=guess)
        except ImpulseConvergenceError as error:
            raise ImpulseConvergenceError(
                "Impulse equation did not converge", (piece.lower, piece.upper), error.iterations
            ) from error
        values[k] = guess
    return Segment("impulse_window", piece.index, piece.lower, 1.0, grid, values, run.left_limit)


def _active_left_limit(segment: Segment) -> float:
    return float(segment.values[-1])


class NonInstantaneousSegments(StateGraph):
    """
    Active intervals alternate with impulse windows until the horizon.
    """

    active = State(force_initial=True)
    impulse_window = State()
    finished = State()

    active.transitions_to(impulse_window)
    active.transitions_to(finished)
    impulse_window.transitions_to(active)
    impulse_window.transitions_to(finished)

    @classmethod
    def check_active(cls, run: SolveRun):
        segment = solve_active(run)
        run.segments.append(segment)
        run.left_limit = _active_left_limit(segment)
        return run.advance()

    @classmethod
    def check_impulse_window(cls, run: SolveRun):
        segment = solve_window(run)
        run.segments.append(segment)
        piece = run.piece
        following = run.advance()
        if following == "active":
            # Restart from phi_i(t_{i+1}, x(t_{i+1}), x(p_i - 0))
            run.restart = _evaluate(
                run.system.impulse_maps[piece.index],
                f"impulse window {piece.index}",
                t=piece.upper,
                x=float(segment.weighted_values[-1]),
                y=run.left_limit,
            )
        return following


class InstantaneousSegments(StateGraph):
    """
    Active intervals separated by point impulses at each t_i.
    """

    active = State(force_initial=True)
    point_impulse = State()
    finished = State()

    active.transitions_to(point_impulse)
    active.transitions_to(finished)
    point_impulse.transitions_to(active)
    point_impulse.transitions_to(finished)

    @classmethod
    def check_active(cls, run: SolveRun):
        segment = solve_active(run)
        run.segments.append(segment)
        run.left_limit = _active_left_limit(segment)
        return run.advance()

    @classmethod
    def check_point_impulse(cls, run: SolveRun):
        piece = run.piece
        # psi_i(t_i, x(t_i - 0)); x and y both carry the left limit
        value = _evaluate(
            run.system.impulse_maps[piece.index - 1],
            f"impulse at t_{piece.index}",
            t=piece.lower,
            x=run.left_limit,
            y=run.left_limit,
        )
        run.segments.append(
            Segment("point_impulse", piece.index, piece.lower, 1.0, [piece.lower], [value], value)
        )
        run.restart = value
        return run.advance()


GRAPHS: dict[str, type[StateGraph]] = {
    Mode.NON_INSTANTANEOUS: NonInstantaneousSegments,
    Mode.INSTANTANEOUS: InstantaneousSegments,
}


def solve(system: ImpulsiveSystem, mesh: MeshSpec | None = None) -> PiecewiseTrajectory:
    """
    Solves the system up to its horizon, segment by segment.
    """
    mesh = mesh or MeshSpec()
    started = time.monotonic()
    run = SolveRun(
        system=system,
        mesh=mesh,
        pieces=system.schedule.intervals(system.mode),
        restart=system.x0,
    )
    GRAPHS[system.mode].run_to_completion(run)
    trajectory = PiecewiseTrajectory(tuple(run.segments))
    logger.info(
        f"Solved {system.mode} system over {len(trajectory)} segments with {mesh.points_per_interval} points per interval ({time.monotonic() - started:.2f}s)"
    )
    return trajectory


def volterra_residuals(
    system: ImpulsiveSystem, trajectory: PiecewiseTrajectory, checkpoints: Iterable[float]
) -> list[float]:
    """
    Substitutes the solved trajectory back into its defining equations at
    the given times: the Volterra equation on active intervals, the
    algebraic impulse equation on windows.
    """
    mu = system.order.mu
    lam = system.order.lam
    residuals = []
    for t in checkpoints:
        segment = trajectory.segment_at(t)
        if segment.kind == "point_impulse":
            residuals.append(0.0)
            continue
        if segment.kind == "impulse_window":
            x = segment.at(t)
            impulse_map = system.impulse_maps[segment.index]
            phi = _evaluate(impulse_map, "residual check", t=t, x=x, y=segment.restart_value)
            residuals.append(abs(phi - x))
            continue
        if t == segment.lower:
            residuals.append(0.0)
            continue
        sigma = segment.grid - segment.lower
        g_hat = np.empty_like(sigma)
        for k in range(1, len(sigma)):
            x = sigma[k] ** (lam - 1) * segment.weighted_values[k]
            g_hat[k] = sigma[k] ** (1 - lam) * _evaluate(
                system.g, "residual check", t=float(segment.grid[k]), x=x
            )
        if lam == 1:
            g_hat[0] = _evaluate(system.g, "residual check", t=segment.lower, x=segment.restart_value)
        else:
            g_hat[0] = g_hat[1]
        integrand = SampledFn(segment.lower, segment.grid, g_hat, lam)
        rhs = segment.restart_value + (t - segment.lower) ** (1 - lam) * frac_integral_quad(
            mu, integrand, t
        )
        residuals.append(abs(segment.weighted_at(t) - rhs))
    return residuals
