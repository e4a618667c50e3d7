"""
The contraction constant K that certifies a unique mild solution, and
sampled estimates of the Lipschitz constants that feed it.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from hilfer_impulse.exceptions import DomainError, NumericError, ParameterError
from hilfer_impulse.expr import Expr
from hilfer_impulse.fraccalc import HilferOrder
from hilfer_impulse.special import rgamma
from hilfer_impulse.systems import ImpulsiveSchedule, Mode

logger = logging.getLogger(__name__)

P_MARGIN = 1e-6
P_SCAN_POINTS = 64


@dataclass(frozen=True)
class ContractionReport:
    K: float
    p_used: float
    terms: tuple[float, float, float]
    contraction: bool


def holder_factor(p: float, order: HilferOrder) -> float:
    """
    ((1-p)/(lam-p))^{1-p} * (p/(p+mu-1))^p, the constant from Hölder's
    inequality on the weighted kernel.
    """
    return ((1 - p) / (order.lam - p)) ** (1 - p) * (p / (p + order.mu - 1)) ** p


def _terms(
    L: float, impulses: Sequence[float], order: HilferOrder, lengths: Sequence[float], p: float
) -> tuple[float, float, float]:
    kernel = L * holder_factor(p, order) * rgamma(order.mu)
    first = max(impulses, default=0.0)
    second = kernel * lengths[0] ** order.mu
    third = 0.0
    for i, impulse in enumerate(impulses):
        # The window after active interval i, then active interval i + 1
        before = lengths[i] if i < len(lengths) else min(lengths)
        after = lengths[i + 1] if i + 1 < len(lengths) else max(lengths)
        third = max(
            third,
            impulse + impulse / before ** (1 - order.lam) + kernel * after**order.mu,
        )
    return first, second, third


def contraction_constant(
    L: float,
    impulses: Sequence[float],
    order: HilferOrder,
    schedule: ImpulsiveSchedule,
    p: float | None = None,
    mode: str = Mode.NON_INSTANTANEOUS,
) -> ContractionReport:
    """
    K = max(max_i I_i, L (p_0 - t_0)^mu / Gamma(mu) * H(p),
    max_i [I_i + I_i / (p_i - t_i)^{1-lam} + L (p_{i+1} - t_{i+1})^mu / Gamma(mu) * H(p)]).

    If p is not given it is chosen to minimise K over (1 - mu, lam).
    """
    if L < 0 or any(impulse < 0 for impulse in impulses):
        raise ParameterError("Lipschitz constants must be non-negative")
    low = 1 - order.mu
    high = order.lam
    if not low < high:
        raise ParameterError(
            f"No Hölder exponent fits between 1 - mu = {low:g} and lam = {high:g}"
        )
    lengths = schedule.active_lengths(mode)
    if p is not None:
        if not low < p < high:
            raise ParameterError(f"p must be in ({low:g}, {high:g}), got {p}")
        terms = _terms(L, impulses, order, lengths, p)
        return ContractionReport(max(terms), p, terms, max(terms) < 1)

    def objective(candidate: float) -> float:
        return max(_terms(L, impulses, order, lengths, candidate))

    candidates = np.linspace(low + P_MARGIN, high - P_MARGIN, P_SCAN_POINTS)
    scores = [objective(candidate) for candidate in candidates]
    best = int(np.argmin(scores))
    choices = [(scores[best], float(candidates[best])), (scores[0], float(candidates[0])), (scores[-1], float(candidates[-1]))]
    if 0 < best < len(candidates) - 1 and scores[best] < min(scores[best - 1], scores[best + 1]):
        result = optimize.minimize_scalar(
            objective,
            bracket=(candidates[best - 1], candidates[best], candidates[best + 1]),
            method="golden",
        )
        choices.append((float(result.fun), float(result.x)))
    _, p_used = min(choices)
    terms = _terms(L, impulses, order, lengths, p_used)
    logger.debug(f"Contraction constant {max(terms):.6g} at p={p_used:.6g}")
    return ContractionReport(max(terms), p_used, terms, max(terms) < 1)


def estimate_lipschitz(
    g: Expr,
    impulse_maps: Sequence[Expr],
    schedule: ImpulsiveSchedule,
    mode: str = Mode.NON_INSTANTANEOUS,
    box: tuple[float, float] = (-10.0, 10.0),
    samples: int = 2000,
    seed: int = 0,
) -> tuple[float, list[float]]:
    """
    Largest difference quotients of g in x over the active intervals, and of
    each impulse map over its window (or at its impulse point), from random
    pairs of states in `box`. These are lower bounds on the true constants.
    """
    rng = np.random.default_rng(seed)
    low, high = box
    if not high > low:
        raise ParameterError(f"Sampling box ({low}, {high}) is empty")
    pieces = schedule.intervals(mode)

    def quotient_max(evaluate, times: np.ndarray, paired: bool) -> float:
        first = rng.uniform(low, high, size=(len(times), 2))
        second = rng.uniform(low, high, size=(len(times), 2))
        largest = 0.0
        for t, (x1, y1), (x2, y2) in zip(times, first, second):
            if not paired:
                y1, y2 = x1, x2
            distance = abs(x1 - x2) + (abs(y1 - y2) if paired else 0.0)
            if distance == 0:
                continue
            try:
                change = abs(evaluate(t, x1, y1) - evaluate(t, x2, y2))
            except DomainError:
                continue
            largest = max(largest, change / distance)
        return largest

    active = [piece for piece in pieces if piece.kind == "active"]
    per_piece = max(1, samples // max(1, len(active)))
    L = 0.0
    for piece in active:
        times = rng.uniform(piece.lower, piece.upper, size=per_piece)
        L = max(L, quotient_max(lambda t, x, y: g(t=t, x=x), times, paired=False))
    impulses = []
    for piece in pieces:
        if piece.kind == "impulse_window":
            impulse_map = impulse_maps[piece.index]
            times = rng.uniform(piece.lower, piece.upper, size=samples)
            impulses.append(
                quotient_max(lambda t, x, y: impulse_map(t=t, x=x, y=y), times, paired=True)
            )
        elif piece.kind == "point_impulse":
            impulse_map = impulse_maps[piece.index - 1]
            times = np.full(samples, piece.lower)
            impulses.append(
                quotient_max(lambda t, x, y: impulse_map(t=t, x=x, y=x), times, paired=False)
            )
    if not math.isfinite(L):
        raise NumericError("Lipschitz estimate for g is not finite")
    logger.info(f"Estimated L={L:.6g}, I={[round(value, 6) for value in impulses]}")
    return L, impulses
