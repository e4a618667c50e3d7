"""
Fractional integrals and Hilfer derivatives.

Closed forms on power functions, plus product integration on sampled
functions. Sampled functions are held in weighted form y = (s - lower)^{1-w} f
and interpolated linearly in s; every sub-integral against the kernel
(t - s)^{mu-1} (s - lower)^{w-1} is then a combination of two incomplete
beta functions, so there is no quadrature error on the interpolant.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sp

from hilfer_impulse.exceptions import DomainError, GridError, ParameterError
from hilfer_impulse.special import gamma, rgamma

logger = logging.getLogger(__name__)

# Exponents closer together than this are treated as equal
EXPONENT_TOLERANCE = 1e-12
MIN_DERIVATIVE_POINTS = 5


@dataclass(frozen=True)
class HilferOrder:
    """
    Order mu and type nu of a Hilfer derivative. nu = 0 is the
    Riemann-Liouville derivative, nu = 1 is Caputo.
    """

    mu: float
    nu: float

    def __post_init__(self):
        if not 0 < self.mu < 1:
            raise ParameterError(f"Order mu must be in (0, 1), got {self.mu}")
        if not 0 <= self.nu <= 1:
            raise ParameterError(f"Type nu must be in [0, 1], got {self.nu}")

    @property
    def lam(self) -> float:
        return self.mu + self.nu - self.mu * self.nu

    @property
    def inner(self) -> float:
        """
        Order of the inner integral, (1 - nu)(1 - mu) = 1 - lam.
        """
        return (1 - self.nu) * (1 - self.mu)

    @property
    def outer(self) -> float:
        """
        Order of the outer integral, nu (1 - mu).
        """
        return self.nu * (1 - self.mu)


@dataclass(frozen=True)
class SampledFn:
    """
    A function on (lower, grid[-1]] stored as weighted samples
    values[k] = (grid[k] - lower)^{1 - weight} f(grid[k]). values[0] is the
    limit at the lower bound. weight = 1 stores f itself.
    """

    lower: float
    grid: np.ndarray
    values: np.ndarray
    weight: float = 1.0
    sigma: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        values = np.array(self.values, dtype=float)
        if grid.ndim != 1 or len(grid) < 2 or grid.shape != values.shape:
            raise GridError("Grid and values must be matching 1-D arrays of length >= 2")
        if grid[0] != self.lower:
            raise GridError(f"Grid starts at {grid[0]} instead of the lower bound {self.lower}")
        if np.any(np.diff(grid) <= 0):
            raise GridError("Grid is not strictly increasing")
        if not np.all(np.isfinite(values)):
            raise GridError("Sampled values are not all finite")
        if not self.weight > 0:
            raise ParameterError(f"Weight exponent must be positive, got {self.weight}")
        grid.flags.writeable = False
        values.flags.writeable = False
        sigma = grid - self.lower
        sigma.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def from_function(cls, lower: float, grid, function, weight: float = 1.0, at_lower: float | None = None):
        """
        Samples `function` (a callable of s) in weighted form. The value at
        the lower bound must be given when weight != 1.
        """
        grid = np.asarray(grid, dtype=float)
        if at_lower is None:
            if weight != 1:
                raise ParameterError("A weighted sample needs its value at the lower bound")
            at_lower = function(lower)
        values = np.empty_like(grid)
        values[0] = at_lower
        values[1:] = (grid[1:] - lower) ** (1 - weight) * np.array([function(s) for s in grid[1:]])
        return cls(lower, grid, values, weight)

    @property
    def last(self) -> float:
        return float(self.grid[-1])

    def weighted_at(self, t: float) -> float:
        self._check_in_range(t)
        return float(np.interp(t, self.grid, self.values))

    def at(self, t: float) -> float:
        """
        The unweighted value f(t), for t in (lower, last].
        """
        return (t - self.lower) ** (self.weight - 1) * self.weighted_at(t)

    def unweighted(self) -> np.ndarray:
        """
        f at every grid node except the lower bound.
        """
        return self.sigma[1:] ** (self.weight - 1) * self.values[1:]

    def _check_in_range(self, t: float):
        if not self.lower < t <= self.last:
            raise GridError(f"t={t:g} is outside ({self.lower:g}, {self.last:g}]")


def graded_grid(lower: float, upper: float, n: int, grading: float = 1.0) -> np.ndarray:
    """
    n + 1 points from lower to upper, clustered towards lower when grading > 1.
    """
    if n < 1 or not upper > lower or not grading > 0:
        raise ParameterError(
            f"Cannot grade ({lower}, {upper}] into {n} cells with grading {grading}"
        )
    grid = lower + (upper - lower) * (np.arange(n + 1) / n) ** grading
    grid[-1] = upper
    return grid


def frac_integral_power(mu: float, delta: float, t: float, t0: float) -> float:
    """
    I^mu (t - t0)^{delta - 1} = Gamma(delta) / Gamma(delta + mu) (t - t0)^{delta + mu - 1}
    """
    if t <= t0:
        raise DomainError(f"Need t > t0 (got t={t:g}, t0={t0:g})")
    if delta <= 0:
        raise DomainError(f"Need delta > 0 (got {delta:g})")
    return gamma(delta) / gamma(delta + mu) * (t - t0) ** (delta + mu - 1)


def hilfer_deriv_power(order: HilferOrder, delta: float, t: float, t0: float) -> float:
    """
    D^{mu,nu} (t - t0)^{delta - 1} = Gamma(delta) / Gamma(delta - mu) (t - t0)^{delta - mu - 1}

    At delta = lam the inner integral is constant and the derivative is 0.
    Below lam the power is too singular for the derivative to exist.
    """
    if t <= t0:
        raise DomainError(f"Need t > t0 (got t={t:g}, t0={t0:g})")
    if delta <= 0:
        raise DomainError(f"Need delta > 0 (got {delta:g})")
    if abs(delta - order.lam) <= EXPONENT_TOLERANCE:
        return 0.0
    if delta < order.lam:
        raise DomainError(
            f"(t - t0)^{delta - 1:g} has no Hilfer derivative of type {order.nu:g} (needs delta >= {order.lam:g})"
        )
    return gamma(delta) * rgamma(delta - order.mu) * (t - t0) ** (delta - order.mu - 1)


def kernel_moment(a, b, tau, beta: float, c: float) -> np.ndarray:
    """
    The integral of (tau - s)^{beta-1} s^{c-1} over [a, b], for
    0 <= a <= b <= tau, vectorised over a, b and tau (tau > 0).
    """
    a, b, tau = np.broadcast_arrays(
        np.asarray(a, dtype=float), np.asarray(b, dtype=float), np.asarray(tau, dtype=float)
    )
    low = np.clip(a / tau, 0, 1)
    high = np.clip(b / tau, 0, 1)
    # Cells near tau lose everything to cancellation in the direct form
    direct = sp.betainc(c, beta, high) - sp.betainc(c, beta, low)
    complement = sp.betainc(beta, c, 1 - low) - sp.betainc(beta, c, 1 - high)
    part = np.where(low >= 0.5, complement, direct)
    return tau ** (beta + c - 1) * sp.beta(c, beta) * part


def _hat_weights(a, b, tau, beta: float, weight: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Weights of the left and right node of each cell [a, b] for a function
    s^{weight-1} * (linear in s), integrated against (tau - s)^{beta-1}.
    """
    m0 = kernel_moment(a, b, tau, beta, weight)
    m1 = kernel_moment(a, b, tau, beta, weight + 1)
    h = b - a
    return (b * m0 - m1) / h, (m1 - a * m0) / h


def kernel_weights(sigma: np.ndarray, mu: float, weight: float) -> np.ndarray:
    """
    Product-integration matrix W, with (W @ y)[k] approximating the
    integral over [0, sigma[k]] of (sigma[k] - s)^{mu-1} s^{weight-1} y(s)
    for y linear between nodes. Row 0 is zero.
    """
    sigma = np.asarray(sigma, dtype=float)
    n = len(sigma) - 1
    tau = sigma[1:, None]
    a = sigma[None, :-1]
    b = sigma[None, 1:]
    inside = b <= tau
    # Cells past tau get dummy bounds and are masked out afterwards
    a_safe = np.where(inside, a, 0.0)
    b_safe = np.where(inside, b, tau)
    left, right = _hat_weights(a_safe, b_safe, tau, mu, weight)
    left = np.where(inside, left, 0.0)
    right = np.where(inside, right, 0.0)
    matrix = np.zeros((n + 1, n + 1))
    matrix[1:, :-1] += left
    matrix[1:, 1:] += right
    return matrix


def _truncated_hat_integral(f: SampledFn, tau: float, beta: float) -> float:
    """
    The integral over [0, tau] of (tau - s)^{beta-1} s^{w-1} y(s), cutting
    the last cell at tau.
    """
    sigma = f.sigma
    count = int(np.searchsorted(sigma, tau, side="left"))
    a = sigma[:count]
    b = np.minimum(sigma[1 : count + 1], tau)
    y_a = f.values[:count]
    y_b = np.interp(b, sigma, f.values)
    left, right = _hat_weights(a, b, tau, beta, f.weight)
    return float(left @ y_a + right @ y_b)


def frac_integral_quad(mu: float, f: SampledFn, t: float) -> float:
    """
    I^mu f (t) by product integration, for t in (lower, last grid point].
    """
    if not 0 < mu:
        raise ParameterError(f"Integral order must be positive, got {mu}")
    f._check_in_range(t)
    if not np.any(f.values):
        return 0.0
    return _truncated_hat_integral(f, t - f.lower, mu) / gamma(mu)


def frac_integral_samples(mu: float, f: SampledFn) -> SampledFn:
    """
    I^mu f at every grid node, returned with weight f.weight + mu. The value
    at the lower bound is the exact limit for the leading power.
    """
    matrix = kernel_weights(f.sigma, mu, f.weight)
    integral = matrix @ f.values / gamma(mu)
    weight = f.weight + mu
    values = np.empty_like(integral)
    values[1:] = f.sigma[1:] ** (1 - weight) * integral[1:]
    values[0] = f.values[0] * gamma(f.weight) / gamma(weight)
    return SampledFn(f.lower, f.grid, values, weight)


def initial_trace(order: HilferOrder, f: SampledFn) -> float:
    """
    The limit of I^{(1-nu)(1-mu)} f at the lower bound. Finite only when
    f is no more singular than (s - lower)^{lam - 1}.
    """
    excess = f.weight + order.inner - 1
    if excess < -EXPONENT_TOLERANCE:
        raise ParameterError(
            f"Function of weight {f.weight:g} is too singular for D^({order.mu:g},{order.nu:g})"
        )
    if excess > EXPONENT_TOLERANCE:
        return 0.0
    return float(f.values[0]) * gamma(f.weight) / gamma(f.weight + order.inner)


@dataclass(frozen=True)
class _InnerIntegral:
    """
    u = I^{(1-nu)(1-mu)} f on the grid, with the variable r = sigma^rho in
    which u is interpolated linearly.
    """

    sigma: np.ndarray
    u: np.ndarray
    rho: float

    @property
    def r(self) -> np.ndarray:
        return self.sigma**self.rho

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.u) / np.diff(self.r)


def _inner_integral(order: HilferOrder, f: SampledFn) -> _InnerIntegral:
    if len(f.grid) < MIN_DERIVATIVE_POINTS:
        raise GridError(
            f"Need at least {MIN_DERIVATIVE_POINTS} grid points for a derivative, got {len(f.grid)}"
        )
    start = initial_trace(order, f)
    alpha = order.inner
    u = np.empty(len(f.grid))
    if alpha == 0:
        u[1:] = f.unweighted()
    else:
        u[1:] = (kernel_weights(f.sigma, alpha, f.weight) @ f.values)[1:] / gamma(alpha)
    u[0] = start
    excess = f.weight + alpha - 1
    # u - u(0) grows like sigma^excess for a plain power, or like
    # sigma^(1 - outer) for a solution with a finite weighted limit
    rho = excess if excess > EXPONENT_TOLERANCE else 1 - order.outer
    return _InnerIntegral(f.sigma, u, min(rho, 1.0))


def _outer_at(inner: _InnerIntegral, beta: float, tau: float) -> float:
    """
    I^beta of the derivative of the interpolated u, at tau. The derivative
    on cell k is slopes[k] * rho * s^{rho-1}.
    """
    sigma = inner.sigma
    count = int(np.searchsorted(sigma, tau, side="left"))
    a = sigma[:count]
    b = np.minimum(sigma[1 : count + 1], tau)
    moments = kernel_moment(a, b, tau, beta, inner.rho)
    return inner.rho * float(inner.slopes[:count] @ moments) / gamma(beta)


def _stencil_derivative(inner: _InnerIntegral, tau: float) -> float:
    """
    du/ds at tau from the quadratic through three neighbouring nodes in r.
    """
    sigma = inner.sigma
    cell = max(int(np.searchsorted(sigma, tau, side="left")) - 1, 0)
    first = min(max(cell - 1, 0), len(sigma) - 3)
    r = inner.r[first : first + 3]
    u = inner.u[first : first + 3]
    x = tau**inner.rho
    derivative = (
        u[0] * ((x - r[1]) + (x - r[2])) / ((r[0] - r[1]) * (r[0] - r[2]))
        + u[1] * ((x - r[0]) + (x - r[2])) / ((r[1] - r[0]) * (r[1] - r[2]))
        + u[2] * ((x - r[0]) + (x - r[1])) / ((r[2] - r[0]) * (r[2] - r[1]))
    )
    return float(derivative) * inner.rho * tau ** (inner.rho - 1)


def hilfer_deriv_quad(order: HilferOrder, f: SampledFn, t: float) -> float:
    """
    D^{mu,nu} f (t) = I^{nu(1-mu)} d/dt I^{(1-nu)(1-mu)} f, for t in
    (lower, last grid point].
    """
    f._check_in_range(t)
    if not np.any(f.values):
        return 0.0
    inner = _inner_integral(order, f)
    tau = t - f.lower
    if order.outer == 0:
        return _stencil_derivative(inner, tau)
    return _outer_at(inner, order.outer, tau)


def hilfer_deriv_samples(order: HilferOrder, f: SampledFn) -> SampledFn:
    """
    D^{mu,nu} f at every grid node. The result has weight rho + nu(1-mu),
    where rho is the leading exponent of the inner integral.
    """
    inner = _inner_integral(order, f)
    beta = order.outer
    sigma = inner.sigma
    slopes = inner.slopes
    derivative = np.empty(len(sigma))
    if beta == 0:
        derivative[1:] = [_stencil_derivative(inner, tau) for tau in sigma[1:]]
    else:
        tau = sigma[1:, None]
        a = sigma[None, :-1]
        b = sigma[None, 1:]
        inside = b <= tau
        moments = kernel_moment(np.where(inside, a, 0.0), np.where(inside, b, tau), tau, beta, inner.rho)
        moments = np.where(inside, moments, 0.0)
        derivative[1:] = inner.rho * (moments @ slopes) / gamma(beta)
    weight = inner.rho + beta
    values = np.empty_like(derivative)
    values[1:] = sigma[1:] ** (1 - weight) * derivative[1:]
    values[0] = slopes[0] * gamma(inner.rho + 1) / gamma(weight)
    return SampledFn(f.lower, f.grid, values, weight)


def composition_residuals(order: HilferOrder, f: SampledFn, t: float) -> tuple[float, float]:
    """
    Residuals of the two composition identities at t:
    |D^{mu,nu} I^mu f - f| and
    |I^mu D^{mu,nu} f - f + (t - lower)^{lam-1} / Gamma(lam) * I^{(1-nu)(1-mu)} f (lower+)|.
    """
    f._check_in_range(t)
    if not np.any(f.values):
        return 0.0, 0.0
    value = f.at(t)
    integrated = frac_integral_samples(order.mu, f)
    first = abs(hilfer_deriv_quad(order, integrated, t) - value)
    derived = hilfer_deriv_samples(order, f)
    correction = (t - f.lower) ** (order.lam - 1) * rgamma(order.lam) * initial_trace(order, f)
    second = abs(frac_integral_quad(order.mu, derived, t) - value + correction)
    logger.debug(f"Composition residuals at t={t:g}: {first:.3e}, {second:.3e}")
    return first, second
