"""
The worked non-instantaneous example: mu = 0.4, g(t, x) = t, t_i = i,
p_i = i + 0.5 and phi_i(t, x, y) = t - i x + y, which has a closed-form
solution on every piece of (0, 2.5].
"""

from hilfer_impulse.exceptions import DomainError, ParameterError
from hilfer_impulse.expr import parse
from hilfer_impulse.fraccalc import HilferOrder
from hilfer_impulse.special import rgamma
from hilfer_impulse.systems import ImpulsiveSchedule, ImpulsiveSystem, Mode

EXAMPLE_MU = 0.4
EXAMPLE_HORIZON = 2.5


def kernel_integral_example(t: float, a: float, mu: float = EXAMPLE_MU) -> float:
    """
    G(t, a), the integral of s (t - s)^{mu-1} over [a, t].
    """
    if not t > a:
        raise DomainError(f"Need t > a (got t={t:g}, a={a:g})")
    return t * (t - a) ** mu / mu - (t - a) ** (mu + 1) / (mu + 1)


def example_system(nu: float, x0: float = 1.0, horizon: float = EXAMPLE_HORIZON) -> ImpulsiveSystem:
    count = int(horizon) + 1
    return ImpulsiveSystem(
        mode=Mode.NON_INSTANTANEOUS,
        order=HilferOrder(EXAMPLE_MU, nu),
        schedule=ImpulsiveSchedule(
            t_points=tuple(float(i) for i in range(count)),
            p_points=tuple(i + 0.5 for i in range(count)),
            horizon=horizon,
        ),
        g=parse("t"),
        impulse_maps=tuple(parse(f"t - {i}*x + y") for i in range(count)),
        x0=x0,
    )


def closed_form_example(t: float, order: HilferOrder, x0: float = 1.0) -> float:
    """
    The exact solution of the example at t in (0, 2.5]. On active pieces
    x(t) = c_i (t - i)^{lam-1} + G(t, i) / Gamma(0.4); on the windows
    x(t) = (t + x(p_i - 0)) / (1 + i).
    """
    if order.mu != EXAMPLE_MU:
        raise ParameterError(f"The example is defined for mu = {EXAMPLE_MU}, got {order.mu}")
    if not 0 < t <= EXAMPLE_HORIZON:
        raise DomainError(f"The example is solved on (0, {EXAMPLE_HORIZON}], got t={t:g}")
    lam = order.lam
    scale = rgamma(EXAMPLE_MU)

    def active(c: float, t: float, a: float) -> float:
        return c * (t - a) ** (lam - 1) + kernel_integral_example(t, a) * scale

    if t <= 0.5:
        return active(x0, t, 0)
    left_0 = active(x0, 0.5, 0)
    if t <= 1:
        return t + left_0
    # phi_0(1, x(1), x(p_0 - 0)) = 1 - 0 * x(1) + x(p_0 - 0)
    restart_1 = 1 + left_0
    if t <= 1.5:
        return active(restart_1, t, 1)
    left_1 = active(restart_1, 1.5, 1)
    if t <= 2:
        return (t + left_1) / 2
    window_end = (2 + left_1) / 2
    restart_2 = 2 - window_end + left_1
    return active(restart_2, t, 2)
