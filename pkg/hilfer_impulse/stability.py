"""
Mittag-Leffler stability envelopes and numerical checks of the Lyapunov
hypotheses along solved trajectories.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np

from hilfer_impulse.conf import setting
from hilfer_impulse.exceptions import DomainError, ParameterError
from hilfer_impulse.expr import Expr
from hilfer_impulse.fraccalc import HilferOrder, SampledFn, hilfer_deriv_samples
from hilfer_impulse.solver import PiecewiseTrajectory, Segment
from hilfer_impulse.special import MLParams, gamma, mittag_leffler
from hilfer_impulse.systems import ImpulsiveSchedule, ImpulsiveSystem, Interval, Mode

logger = logging.getLogger(__name__)

ALGEBRAIC_TOLERANCE = 1e-9
DERIVATIVE_TOLERANCE = 5e-3
DOMINANCE_TOLERANCE = 5e-3

SECOND_PARAMS = ("lambda", "nu")


@dataclass(frozen=True)
class LyapunovSpec:
    """
    A Lyapunov candidate V(t, x) with alpha1 |x|^a <= V <= alpha2 |x|^{ab},
    decay rate alpha3, and impulse bound alpha4 (optional when the system
    has no impulses).
    """

    V: Expr
    alpha1: float
    alpha2: float
    alpha3: float
    a: float = 1.0
    b: float = 1.0
    alpha4: float | None = None

    def __post_init__(self):
        self.V.require({"t", "x"}, "a Lyapunov function V(t, x)")
        for name in ("alpha1", "alpha2", "alpha3", "a", "b"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)}")
        if self.alpha2 > 1:
            raise ParameterError(f"alpha2 must be at most 1, got {self.alpha2}")
        if self.alpha4 is not None:
            if not self.alpha4 > 0:
                raise ParameterError(f"alpha4 must be positive, got {self.alpha4}")
            if self.alpha4 > self.alpha1:
                raise ParameterError(
                    f"alpha4 ({self.alpha4}) must not exceed alpha1 ({self.alpha1})"
                )


@dataclass(frozen=True)
class StabilityCertificate:
    lyap: LyapunovSpec
    order: HilferOrder
    h: float
    gamma: float
    interval_count_checked: int
    second_param: str = "lambda"
    verdict: bool | None = None
    margin: float | None = None

    @property
    def ml_params(self) -> MLParams:
        second = self.order.lam if self.second_param == "lambda" else self.order.nu
        return MLParams(self.order.mu, second)


@dataclass(frozen=True)
class GeneralizedEnvelopeSpec:
    """
    The envelope [m(I^{1-lam} x(t0)) (t - t0)^{lam-1} E_{mu,lam}(-gamma (t - t0)^mu)]^c.
    """

    m: Expr
    m0: float
    c: float
    gamma: float
    integral_ic: float

    def __post_init__(self):
        self.m.require({"x"}, "a comparison function m(x)")
        if self.m(x=0.0) != 0:
            raise ParameterError("The comparison function must vanish at 0")
        if not self.c > 0:
            raise ParameterError(f"c must be positive, got {self.c}")
        if self.gamma < 0 or self.m0 < 0:
            raise ParameterError("gamma and m0 must be non-negative")


def certificate(
    lyap: LyapunovSpec,
    order: HilferOrder,
    interval_count: int = 1,
    second_param: str | None = None,
    h: float | None = None,
) -> StabilityCertificate:
    """
    Derives h = (alpha2 / (Gamma(lam)^{i+1} alpha1))^{1/a} for the deepest
    interval index i = interval_count - 1, and gamma = alpha3.
    """
    second_param = second_param or setting("ENVELOPE_SECOND_PARAM")
    if second_param not in SECOND_PARAMS:
        raise ParameterError(f"Envelope parameter must be one of {SECOND_PARAMS}, got {second_param!r}")
    if interval_count < 1:
        raise ParameterError("A certificate covers at least one interval")
    if h is None:
        h = (lyap.alpha2 / (gamma(order.lam) ** interval_count * lyap.alpha1)) ** (1 / lyap.a)
    elif not h > 0:
        raise ParameterError(f"h must be positive, got {h}")
    return StabilityCertificate(
        lyap=lyap,
        order=order,
        h=h,
        gamma=lyap.alpha3,
        interval_count_checked=interval_count,
        second_param=second_param,
    )


def envelope_generalized(spec: GeneralizedEnvelopeSpec, order: HilferOrder, t: float, t0: float) -> float:
    if t <= t0:
        raise DomainError(f"Need t > t0 (got t={t:g}, t0={t0:g})")
    base = spec.m(x=spec.integral_ic)
    if base < 0:
        raise DomainError(f"m({spec.integral_ic:g}) = {base:g} is negative")
    sigma = t - t0
    value = base * sigma ** (order.lam - 1) * mittag_leffler(
        MLParams(order.mu, order.lam), -spec.gamma * sigma**order.mu
    )
    return value**spec.c


def envelope_lemma(
    lyap: LyapunovSpec,
    order: HilferOrder,
    x0_norm: float,
    t: float,
    tau: float,
    gamma_coef: float | None = None,
) -> float:
    """
    Single-interval bound
    |x0|^b (alpha2 / (Gamma(lam) alpha1) (t - tau)^{lam-1} E_{mu,lam}(-gamma (t - tau)^mu))^{1/a},
    with gamma = alpha3 / alpha2 unless given.
    """
    if t <= tau:
        raise DomainError(f"Need t > tau (got t={t:g}, tau={tau:g})")
    if gamma_coef is None:
        gamma_coef = lyap.alpha3 / lyap.alpha2
    sigma = t - tau
    inner = (
        lyap.alpha2
        / (gamma(order.lam) * lyap.alpha1)
        * sigma ** (order.lam - 1)
        * mittag_leffler(MLParams(order.mu, order.lam), -gamma_coef * sigma**order.mu)
    )
    return x0_norm**lyap.b * inner ** (1 / lyap.a)


def lyapunov_value_bound(
    lyap: LyapunovSpec, order: HilferOrder, integral_ic: float, t: float, tau: float
) -> float:
    """
    V(t, x(t)) <= I^{1-lam} V(tau) (t - tau)^{lam-1} E_{mu,lam}(-(alpha3/alpha2)(t - tau)^mu)
    """
    if t <= tau:
        raise DomainError(f"Need t > tau (got t={t:g}, tau={tau:g})")
    sigma = t - tau
    return (
        integral_ic
        * sigma ** (order.lam - 1)
        * mittag_leffler(
            MLParams(order.mu, order.lam), -lyap.alpha3 / lyap.alpha2 * sigma**order.mu
        )
    )


def _factor(cert: StabilityCertificate, length: float) -> float:
    """
    length^{lam-1} E(-gamma length^mu), the contribution of one interval.
    """
    return length ** (cert.order.lam - 1) * mittag_leffler(
        cert.ml_params, -cert.gamma * length**cert.order.mu
    )


def _locate(pieces: list[Interval], t: float) -> Interval:
    actives = [piece for piece in pieces if piece.kind != "point_impulse"]
    if t == actives[0].lower:
        return actives[0]
    for piece in actives:
        if piece.lower < t <= piece.upper:
            return piece
    raise DomainError(f"t={t:g} is outside the schedule")


def _prefix(cert: StabilityCertificate, pieces: list[Interval], index: int) -> float:
    """
    The product of interval factors over the active intervals before `index`.
    """
    product = 1.0
    for piece in pieces:
        if piece.kind == "active" and piece.index < index:
            product *= _factor(cert, piece.upper - piece.lower)
    return product


def _envelope_terms(
    cert: StabilityCertificate, pieces: list[Interval], t: float
) -> tuple[Interval, float, float | None]:
    """
    Returns the piece containing t, the product of factors that is fixed at
    t (everything but the running tail), and the running elapsed time
    t - t_i for active pieces (None in impulse windows).
    """
    piece = _locate(pieces, t)
    prefix = _prefix(cert, pieces, piece.index)
    if piece.kind == "impulse_window":
        active = next(p for p in pieces if p.kind == "active" and p.index == piece.index)
        return piece, prefix * _factor(cert, active.upper - active.lower), None
    return piece, prefix, t - piece.lower


def envelope_piecewise(
    cert: StabilityCertificate,
    schedule: ImpulsiveSchedule,
    x0_norm: float,
    t: float,
    mode: str = Mode.NON_INSTANTANEOUS,
) -> float:
    """
    h |x0|^b [prod_{l<i} Delta_l^{lam-1} E(-gamma Delta_l^mu) * tail(t)]^{1/a}

    tail(t) is the running factor of the current active interval; inside
    an impulse window the last completed factor is held.
    """
    if t < schedule.t0:
        raise DomainError(f"t={t:g} precedes t0={schedule.t0:g}")
    if x0_norm == 0:
        return 0.0
    pieces = schedule.intervals(mode)
    _, product, elapsed = _envelope_terms(cert, pieces, t)
    if elapsed is not None:
        if elapsed > 0:
            product *= _factor(cert, elapsed)
        elif cert.order.lam < 1:
            return math.inf
        else:
            product *= mittag_leffler(cert.ml_params, 0.0)
    return cert.h * x0_norm**cert.lyap.b * product ** (1 / cert.lyap.a)


def _scaled_power(coefficient: float, elapsed: float, exponent: float) -> float:
    """
    coefficient * elapsed^exponent, taking the limit from the right at
    elapsed = 0: infinite for a negative exponent, coefficient for a zero
    one. A zero coefficient stays zero.
    """
    if coefficient == 0:
        return 0.0
    if elapsed > 0:
        return coefficient * math.pow(elapsed, exponent)
    if exponent < 0:
        return math.inf
    return coefficient if exponent == 0 else 0.0


def _weighted_envelope(
    cert: StabilityCertificate, pieces: list[Interval], x0_norm: float, index: int, elapsed: float
) -> float:
    """
    (t - t_i)^{1-lam} times the envelope on active interval `index`, with
    the powers of t - t_i combined. Finite at t_i only when a = 1 or lam = 1.
    """
    product = _prefix(cert, pieces, index)
    lam = cert.order.lam
    a = cert.lyap.a
    e = mittag_leffler(cert.ml_params, -cert.gamma * elapsed**cert.order.mu)
    exponent = (lam - 1) / a + 1 - lam
    return _scaled_power(cert.h * x0_norm**cert.lyap.b * (product * e) ** (1 / a), elapsed, exponent)


def check_envelope_dominance(
    trajectory: PiecewiseTrajectory,
    cert: StabilityCertificate,
    schedule: ImpulsiveSchedule,
    mode: str = Mode.NON_INSTANTANEOUS,
    x0_norm: float | None = None,
) -> StabilityCertificate:
    """
    Fills in margin = min over the trajectory of envelope - |x| and the
    verdict. Active segments are compared in weighted form.
    """
    if x0_norm is None:
        x0_norm = abs(trajectory.segments[0].restart_value)
    pieces = schedule.intervals(mode)
    margin = math.inf
    worst_at = schedule.t0
    for segment in trajectory:
        for k, t in enumerate(segment.grid):
            t = float(t)
            if segment.kind == "active":
                if x0_norm == 0:
                    bound = 0.0
                else:
                    bound = _weighted_envelope(cert, pieces, x0_norm, segment.index, t - segment.lower)
                gap = bound - abs(float(segment.weighted_values[k]))
            else:
                gap = envelope_piecewise(cert, schedule, x0_norm, t, mode) - abs(
                    float(segment.weighted_values[k])
                )
            if gap < margin:
                margin, worst_at = gap, t
    logger.info(f"Envelope dominance margin {margin:.3e} (worst at t={worst_at:g})")
    return dataclasses.replace(cert, margin=margin, verdict=margin >= -DOMINANCE_TOLERANCE)


def check_generalized_dominance(
    trajectory: PiecewiseTrajectory, spec: GeneralizedEnvelopeSpec, order: HilferOrder
) -> float:
    """
    min of envelope_generalized - |x| over the first active segment, in
    weighted form.
    """
    segment = trajectory.of_kind("active")[0]
    base = spec.m(x=spec.integral_ic)
    if base < 0:
        raise DomainError(f"m({spec.integral_ic:g}) = {base:g} is negative")
    lam = order.lam
    params = MLParams(order.mu, lam)
    sigma = segment.grid - segment.lower
    margin = math.inf
    for k, elapsed in enumerate(sigma):
        elapsed = float(elapsed)
        e = mittag_leffler(params, -spec.gamma * elapsed**order.mu)
        bound = _scaled_power((base * e) ** spec.c, elapsed, (lam - 1) * spec.c + 1 - lam)
        margin = min(margin, bound - abs(float(segment.weighted_values[k])))
    return margin


@dataclass(frozen=True)
class CheckResult:
    name: str
    margin: float
    t: float | None
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tolerance


@dataclass(frozen=True)
class LyapunovReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def worst(self) -> CheckResult:
        return min(self.checks, key=lambda check: check.margin + check.tolerance)


class _Worst:
    """
    Tracks the smallest margin seen for one named check.
    """

    def __init__(self, name: str, tolerance: float):
        self.name = name
        self.tolerance = tolerance
        self.margin = math.inf
        self.t: float | None = None

    def see(self, margin: float, t: float):
        if margin < self.margin:
            self.margin, self.t = margin, t

    def result(self) -> CheckResult:
        # Checks with nothing to look at pass trivially
        margin = 0.0 if self.margin == math.inf else self.margin
        return CheckResult(self.name, margin, self.t, self.tolerance)


def _composite_samples(
    segment: Segment, lyap: LyapunovSpec, lam: float
) -> SampledFn:
    """
    s -> V(s, x(s)) on an active segment, in weighted form with weight lam.
    The weighted value at the lower bound is taken from the first node
    unless the segment is unweighted.
    """
    x = segment.values
    sigma = segment.grid - segment.lower
    values = np.empty(len(sigma))
    for k in range(1, len(sigma)):
        values[k] = sigma[k] ** (1 - lam) * lyap.V(t=float(segment.grid[k]), x=float(x[k]))
    if lam == 1:
        values[0] = lyap.V(t=segment.lower, x=segment.restart_value)
    else:
        values[0] = values[1]
    return SampledFn(segment.lower, segment.grid, values, lam)


def verify_lyapunov(
    system: ImpulsiveSystem,
    trajectory: PiecewiseTrajectory,
    lyap: LyapunovSpec,
    grid_stride: int = 1,
) -> LyapunovReport:
    """
    Checks the Lyapunov hypotheses along a solved trajectory:
    V(t, 0) = 0, g(t, 0) = 0, impulse maps fixing 0, the sandwich
    alpha1 |x|^a <= V <= alpha2 |x|^{ab}, the decay
    D^{mu,nu} V(t, x(t)) <= -alpha3 |x|^{ab} on active intervals, and
    V <= alpha4 |x(left limit)|^a across impulses.
    """
    if grid_stride < 1:
        raise ParameterError(f"grid_stride must be at least 1, got {grid_stride}")
    order = system.order
    lam = order.lam
    a, b = lyap.a, lyap.b
    zero_at_origin = _Worst("V(t,0)=0", ALGEBRAIC_TOLERANCE)
    rhs_at_origin = _Worst("g(t,0)=0", ALGEBRAIC_TOLERANCE)
    impulses_at_origin = _Worst("impulse maps fix 0", ALGEBRAIC_TOLERANCE)
    lower = _Worst("alpha1|x|^a <= V", ALGEBRAIC_TOLERANCE)
    upper = _Worst("V <= alpha2|x|^ab", ALGEBRAIC_TOLERANCE)
    decay = _Worst("D V <= -alpha3|x|^ab", DERIVATIVE_TOLERANCE)
    jumps = _Worst("V <= alpha4|x(left)|^a", ALGEBRAIC_TOLERANCE)

    for position, segment in enumerate(trajectory.segments):
        x = segment.values
        for k in range(0, len(segment.grid), grid_stride):
            t = float(segment.grid[k])
            zero_at_origin.see(-abs(lyap.V(t=t, x=0.0)), t)
            if not math.isfinite(x[k]):
                continue
            value = lyap.V(t=t, x=float(x[k]))
            norm = abs(float(x[k]))
            lower.see(value - lyap.alpha1 * norm**a, t)
            upper.see(lyap.alpha2 * norm ** (a * b) - value, t)
            if segment.kind == "active":
                rhs_at_origin.see(-abs(system.g(t=t, x=0.0)), t)
            elif segment.kind == "impulse_window":
                impulses_at_origin.see(
                    -abs(system.impulse_maps[segment.index](t=t, x=0.0, y=0.0)), t
                )
                if lyap.alpha4 is not None:
                    jumps.see(lyap.alpha4 * abs(segment.restart_value) ** a - value, t)
            else:
                impulses_at_origin.see(
                    -abs(system.impulse_maps[segment.index - 1](t=t, x=0.0, y=0.0)), t
                )
        if segment.kind == "point_impulse" and lyap.alpha4 is not None:
            left = float(trajectory.segments[position - 1].values[-1])
            value = lyap.V(t=segment.lower, x=float(segment.weighted_values[0]))
            jumps.see(lyap.alpha4 * abs(left) ** a - value, segment.lower)
        if segment.kind == "active":
            derivative = hilfer_deriv_samples(order, _composite_samples(segment, lyap, lam))
            sigma = derivative.sigma
            for k in range(2, len(sigma), grid_stride):
                if not math.isfinite(x[k]):
                    continue
                d_value = sigma[k] ** (derivative.weight - 1) * derivative.values[k]
                decay.see(-lyap.alpha3 * abs(float(x[k])) ** (a * b) - d_value, float(segment.grid[k]))

    report = LyapunovReport(
        tuple(
            check.result()
            for check in (zero_at_origin, rhs_at_origin, impulses_at_origin, lower, upper, decay, jumps)
        )
    )
    logger.info(
        f"Lyapunov checks {'passed' if report.passed else 'failed'} (worst: {report.worst.name} margin {report.worst.margin:.3e})"
    )
    return report
