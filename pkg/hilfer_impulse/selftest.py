"""
Oracle suites comparing the numerical operators against closed forms:
power functions through the fractional integral and Hilfer derivative,
the two composition identities, and Laplace transforms of Mittag-Leffler
functions.
"""

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from hilfer_impulse.fraccalc import (
    HilferOrder,
    SampledFn,
    composition_residuals,
    frac_integral_power,
    frac_integral_quad,
    graded_grid,
    hilfer_deriv_power,
    hilfer_deriv_quad,
)
from hilfer_impulse.special import MLParams, ml_laplace_residual

logger = logging.getLogger(__name__)

CLOSED_FORM_TOLERANCE = 5e-3
COMPOSITION_TOLERANCE = 1e-2
LAPLACE_TOLERANCE = 1e-6

DELTAS = (0.7, 1.0, 1.5, 2.0)
ORDERS = tuple(HilferOrder(mu, nu) for mu in (0.3, 0.4, 0.7) for nu in (0.0, 0.5, 1.0))
CHECK_TIMES = (0.25, 0.5, 1.0)
GRADING = 2.0


@dataclass(frozen=True)
class CaseResult:
    name: str
    error: float
    tolerance: float
    refined_error: float | None = None

    @property
    def passed(self) -> bool:
        return self.error <= self.tolerance


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    cases: tuple[CaseResult, ...]
    duration: float = 0.0

    @property
    def passed(self) -> bool:
        return all(case.passed for case in self.cases)

    @property
    def worst(self) -> CaseResult:
        return max(self.cases, key=lambda case: case.error / case.tolerance)


def _relative(approx: float, exact: float) -> float:
    return abs(approx - exact) / max(1.0, abs(exact))


def _power_samples(delta: float, points: int) -> SampledFn:
    """
    s^{delta-1} on a graded grid over [0, 1], stored with weight delta so
    the samples are all 1.
    """
    grid = graded_grid(0.0, 1.0, points, GRADING)
    return SampledFn(0.0, grid, np.ones_like(grid), delta)


def _power_errors(order: HilferOrder, delta: float, points: int) -> tuple[float, float | None]:
    f = _power_samples(delta, points)
    integral_error = max(
        _relative(frac_integral_quad(order.mu, f, t), frac_integral_power(order.mu, delta, t, 0.0))
        for t in CHECK_TIMES
    )
    if delta < order.lam - 1e-12:
        return integral_error, None
    derivative_error = max(
        _relative(hilfer_deriv_quad(order, f, t), hilfer_deriv_power(order, delta, t, 0.0))
        for t in CHECK_TIMES
    )
    return integral_error, derivative_error


def closed_form_suite(points: int) -> list[CaseResult]:
    cases = []
    for order in ORDERS:
        # The lam - 1 power is annihilated by the derivative
        for delta in DELTAS + (order.lam,):
            coarse = _power_errors(order, delta, points)
            fine = _power_errors(order, delta, 2 * points)
            label = f"mu={order.mu:g} nu={order.nu:g} delta={delta:g}"
            cases.append(
                CaseResult(f"I {label}", coarse[0], CLOSED_FORM_TOLERANCE, fine[0])
            )
            if coarse[1] is not None:
                cases.append(
                    CaseResult(f"D {label}", coarse[1], CLOSED_FORM_TOLERANCE, fine[1])
                )
    return cases


COMPOSITION_CASES: tuple[tuple[str, HilferOrder, float, Callable[[np.ndarray], np.ndarray]], ...] = (
    ("f=s", HilferOrder(0.4, 1.0), 1.0, lambda s: s),
    ("f=1+s", HilferOrder(0.4, 0.5), 1.0, lambda s: 1 + s),
    ("f=1+s+s^2", HilferOrder(0.7, 1.0), 1.0, lambda s: 1 + s + s**2),
)


def _composition_error(order: HilferOrder, weight: float, function, points: int) -> float:
    grid = graded_grid(0.0, 1.0, points, GRADING)
    f = SampledFn(0.0, grid, function(grid), weight)
    return max(max(composition_residuals(order, f, t)) for t in (0.5, 1.0))


def composition_suite(points: int) -> list[CaseResult]:
    cases = []
    for name, order, weight, function in COMPOSITION_CASES:
        label = f"{name} mu={order.mu:g} nu={order.nu:g}"
        cases.append(
            CaseResult(
                label,
                _composition_error(order, weight, function, points),
                COMPOSITION_TOLERANCE,
                _composition_error(order, weight, function, 2 * points),
            )
        )
    # The singular power s^{lam-1} reproduces itself through both identities
    order = HilferOrder(0.4, 0.6)
    cases.append(
        CaseResult(
            "f=s^(lam-1) mu=0.4 nu=0.6",
            _composition_error(order, order.lam, np.ones_like, points),
            COMPOSITION_TOLERANCE,
        )
    )
    return cases


LAPLACE_CASES = (
    (MLParams(1.0, 1.0), 1.0, 2.0, 40.0),
    (MLParams(0.4, 1.0), 1.0, 1.0, 60.0),
    (MLParams(0.5, 0.5), 0.0, 1.0, 60.0),
)


def laplace_suite(points: int) -> list[CaseResult]:
    return [
        CaseResult(
            f"mu={params.mu:g} lam={params.lam:g} gamma={gamma_coef:g} s={s:g}",
            ml_laplace_residual(params, gamma_coef, s, horizon),
            LAPLACE_TOLERANCE,
        )
        for params, gamma_coef, s, horizon in LAPLACE_CASES
    ]


SUITES: dict[str, Callable[[int], list[CaseResult]]] = {
    "closed_form": closed_form_suite,
    "composition": composition_suite,
    "laplace": laplace_suite,
}


def run_suites(names: list[str] | None = None, points: int = 128) -> list[SuiteResult]:
    results = []
    for name in names or list(SUITES):
        started = time.monotonic()
        cases = SUITES[name](points)
        duration = time.monotonic() - started
        result = SuiteResult(name, tuple(cases), duration)
        logger.info(
            f"Suite {name}: {'pass' if result.passed else 'FAIL'} ({duration:.2f}s)"
        )
        results.append(result)
    return results
