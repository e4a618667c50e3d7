"""
Shared systems and configuration documents for the tests.
"""

from hilfer_impulse.expr import parse
from hilfer_impulse.fraccalc import HilferOrder
from hilfer_impulse.stability import LyapunovSpec
from hilfer_impulse.systems import ImpulsiveSchedule, ImpulsiveSystem, Mode

EXAMPLE_DOCUMENT = {
    "mode": "non_instantaneous",
    "order": {"mu": 0.4, "nu": 1.0},
    "schedule": {"t_points": [0, 1, 2], "p_points": [0.5, 1.5, 2.5], "horizon": 2.5},
    "g": "t",
    "impulse_maps": ["t - 0*x + y", "t - 1*x + y", "t - 2*x + y"],
    "x0": 1.0,
    "mesh": {"points_per_interval": 64},
}

LINEAR_DECAY_DOCUMENT = {
    "mode": "instantaneous",
    "order": {"mu": 0.4, "nu": 1.0},
    "schedule": {"t_points": [0], "horizon": 1.0},
    "g": "-x",
    "x0": 1.0,
    "mesh": {"points_per_interval": 64, "grading": 2},
    "lyapunov": {"V": "abs(x)", "alpha1": 1, "alpha2": 1, "alpha3": 1},
}


def linear_decay_system(nu: float = 1.0, x0: float = 1.0, horizon: float = 1.0) -> ImpulsiveSystem:
    """
    D^{0.4,nu} x = -x with no impulses, solved by a Mittag-Leffler function.
    """
    return ImpulsiveSystem(
        mode=Mode.INSTANTANEOUS,
        order=HilferOrder(0.4, nu),
        schedule=ImpulsiveSchedule(t_points=(0.0,), horizon=horizon),
        g=parse("-x"),
        impulse_maps=(),
        x0=x0,
    )


def zero_system(mode: str = Mode.NON_INSTANTANEOUS, order: HilferOrder | None = None) -> ImpulsiveSystem:
    """
    A system with g(t, 0) = 0 and impulse maps that keep 0 fixed.
    """
    if mode == Mode.NON_INSTANTANEOUS:
        schedule = ImpulsiveSchedule(t_points=(0.0, 1.0), p_points=(0.5, 1.5), horizon=2.0)
        maps = (parse("0.5*x"), parse("x - y"))
    else:
        schedule = ImpulsiveSchedule(t_points=(0.0, 1.0), horizon=2.0)
        maps = (parse("0.5*x"),)
    return ImpulsiveSystem(
        mode=mode,
        order=order or HilferOrder(0.5, 0.5),
        schedule=schedule,
        g=parse("-x + sin(t)*x"),
        impulse_maps=maps,
        x0=0.0,
    )


UNIT_LYAPUNOV = LyapunovSpec(V=parse("abs(x)"), alpha1=1, alpha2=1, alpha3=1)
