"""
Descriptions of impulsive Hilfer systems: the impulse schedule, the system
itself, the mesh to solve it on, and weighted initial conditions.
"""

from dataclasses import dataclass, field

from django.db.models import TextChoices

from hilfer_impulse.conf import setting
from hilfer_impulse.exceptions import ParameterError, ScheduleError
from hilfer_impulse.expr import Expr
from hilfer_impulse.fraccalc import HilferOrder
from hilfer_impulse.special import gamma

RHS_VARIABLES = frozenset({"t", "x"})
IMPULSE_VARIABLES = frozenset({"t", "x", "y"})


class Mode(TextChoices):
    NON_INSTANTANEOUS = "non_instantaneous"
    INSTANTANEOUS = "instantaneous"


class InitialForm(TextChoices):
    WEIGHTED = "weighted"
    INTEGRAL = "integral"


@dataclass(frozen=True)
class Interval:
    """
    One piece of a schedule: an active interval (lower, upper] on which the
    differential equation holds, or an impulse window / impulse point.
    `index` is the interval number i of t_i.
    """

    kind: str
    index: int
    lower: float
    upper: float


@dataclass(frozen=True)
class ImpulsiveSchedule:
    """
    Impulse points t_0 < t_1 < ... and, for non-instantaneous impulses, the
    ends of the active intervals p_0 < p_1 < ..., interleaved as
    t_0 < p_0 < t_1 < p_1 < ... The horizon cuts the schedule short.
    """

    t_points: tuple[float, ...]
    horizon: float
    p_points: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "t_points", tuple(float(t) for t in self.t_points))
        if self.p_points is not None:
            object.__setattr__(self, "p_points", tuple(float(p) for p in self.p_points))

    @property
    def t0(self) -> float:
        return self.t_points[0]

    def validate(self, mode: str) -> None:
        if not self.t_points:
            raise ScheduleError("Schedule needs at least the initial point t_0")
        if not self.horizon > self.t0:
            raise ScheduleError(f"Horizon {self.horizon:g} must be after t_0 = {self.t0:g}")
        if mode == Mode.NON_INSTANTANEOUS:
            if self.p_points is None or len(self.p_points) != len(self.t_points):
                raise ScheduleError(
                    "Non-instantaneous schedules need one p point per t point"
                )
            merged = [point for pair in zip(self.t_points, self.p_points) for point in pair]
            for earlier, later in zip(merged, merged[1:]):
                if not earlier < later:
                    raise ScheduleError(
                        f"Schedule points must interleave as t_0 < p_0 < t_1 < p_1 < ... ({earlier:g} is not before {later:g})"
                    )
        else:
            if self.p_points:
                raise ScheduleError("Instantaneous schedules do not take p points")
            for earlier, later in zip(self.t_points, self.t_points[1:]):
                if not earlier < later:
                    raise ScheduleError(
                        f"Impulse points must increase ({earlier:g} is not before {later:g})"
                    )
            if self.t_points[-1] > self.horizon:
                raise ScheduleError(
                    f"Impulse point {self.t_points[-1]:g} is beyond the horizon {self.horizon:g}"
                )

    def intervals(self, mode: str) -> list[Interval]:
        """
        The pieces of the schedule up to the horizon, in time order.
        """
        self.validate(mode)
        pieces = []
        if mode == Mode.NON_INSTANTANEOUS:
            assert self.p_points is not None
            for i, (t, p) in enumerate(zip(self.t_points, self.p_points)):
                if t >= self.horizon:
                    break
                pieces.append(Interval("active", i, t, min(p, self.horizon)))
                if p >= self.horizon:
                    break
                following = self.t_points[i + 1] if i + 1 < len(self.t_points) else self.horizon
                pieces.append(Interval("impulse_window", i, p, min(following, self.horizon)))
        else:
            points = list(self.t_points)
            for i, t in enumerate(points):
                if t >= self.horizon:
                    break
                following = points[i + 1] if i + 1 < len(points) else self.horizon
                pieces.append(Interval("active", i, t, following))
                if i + 1 < len(points):
                    pieces.append(Interval("point_impulse", i + 1, following, following))
        return pieces

    def impulse_count(self, mode: str) -> int:
        return sum(
            1
            for piece in self.intervals(mode)
            if piece.kind in ("impulse_window", "point_impulse")
        )

    def active_lengths(self, mode: str) -> list[float]:
        return [
            piece.upper - piece.lower
            for piece in self.intervals(mode)
            if piece.kind == "active"
        ]


@dataclass(frozen=True)
class ImpulsiveSystem:
    """
    D^{mu,nu} x = g(t, x) on each active interval, restarted from a weighted
    limit at every t_i. In non-instantaneous mode impulse_maps[i] is
    phi_i(t, x, y), holding on (p_i, t_{i+1}] with y = x(p_i - 0). In
    instantaneous mode impulse_maps[i] is psi_{i+1}, applied at t_{i+1}
    to x = y = x(t_{i+1} - 0).
    """

    mode: str
    order: HilferOrder
    schedule: ImpulsiveSchedule
    g: Expr
    impulse_maps: tuple[Expr, ...] = ()
    x0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "impulse_maps", tuple(self.impulse_maps))
        self.g.require(RHS_VARIABLES, "the right-hand side g(t, x)")
        for impulse_map in self.impulse_maps:
            impulse_map.require(IMPULSE_VARIABLES, "an impulse map")
        needed = self.schedule.impulse_count(self.mode)
        if len(self.impulse_maps) < needed:
            raise ScheduleError(
                f"The schedule has {needed} impulses within the horizon but only {len(self.impulse_maps)} impulse maps were given"
            )

    @property
    def lam(self) -> float:
        return self.order.lam


@dataclass(frozen=True)
class MeshSpec:
    """
    Points per interval, and the grading exponent used to cluster points
    at each lower bound. grading=None means 1/lam.
    """

    points_per_interval: int = field(default_factory=lambda: setting("POINTS_PER_INTERVAL"))
    grading: float | None = None

    def __post_init__(self):
        if self.points_per_interval < 8:
            raise ParameterError(
                f"Need at least 8 points per interval, got {self.points_per_interval}"
            )
        if self.grading is not None and not self.grading >= 1:
            raise ParameterError(f"Mesh grading must be >= 1, got {self.grading}")

    def grading_for(self, order: HilferOrder) -> float:
        if self.grading is None:
            return 1 / order.lam
        return self.grading


@dataclass(frozen=True)
class WeightedInitialCondition:
    """
    An initial condition given either as the weighted limit C of
    (t - t_0)^{1-lam} x(t), or as the integral value B = C * Gamma(lam).
    """

    form: str
    value: float

    def __post_init__(self):
        object.__setattr__(self, "form", InitialForm(self.form))


def convert_initial(ic: WeightedInitialCondition, lam: float) -> WeightedInitialCondition:
    """
    Switches between the integral form B and the weighted form C = B / Gamma(lam).
    """
    if not 0 < lam <= 1:
        raise ParameterError(f"lam must be in (0, 1], got {lam}")
    if ic.form == InitialForm.WEIGHTED:
        return WeightedInitialCondition(InitialForm.INTEGRAL, ic.value * gamma(lam))
    return WeightedInitialCondition(InitialForm.WEIGHTED, ic.value / gamma(lam))
