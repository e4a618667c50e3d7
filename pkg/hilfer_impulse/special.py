"""
Gamma and Mittag-Leffler functions on real arguments.

Gamma uses the 13-term Lanczos rational approximation (g ~ 6.0247) in its
exp(g)-scaled form, with reflection below 0.5. The Mittag-Leffler function
E_{mu,lam}(z) = sum z^k / Gamma(mu k + lam) is evaluated by its Taylor
series near the origin, by the algebraic asymptotic expansion far out on the
negative axis, and by an extended-precision series (mpmath) whenever double
precision cannot certify the requested tolerance.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy import integrate

from hilfer_impulse.exceptions import (
    AccuracyNotAttained,
    DomainError,
    ParameterError,
    PoleError,
    QuadratureError,
)

logger = logging.getLogger(__name__)

LANCZOS_G = 6.024680040776729583740234375

# Highest degree first, ready for numpy.polyval
LANCZOS_NUMERATOR = np.array(
    [
        0.006061842346248906525783753964555936883222,
        0.5098416655656676188125178644804694509993,
        19.51992788247617482847860966235652136208,
        449.9445569063168119446858607650988409623,
        6955.999602515376140356310115515198987526,
        75999.29304014542649875303443598909137092,
        601859.6171681098786670226533699352302507,
        3481712.15498064590882071018964774556468,
        14605578.08768506808414169982791359218571,
        43338889.32467613834773723740590533316085,
        86363131.28813859145546927288977868422342,
        103794043.1163445451906271053616070238554,
        56906521.91347156388090791033559122686859,
    ]
)
LANCZOS_DENOMINATOR = np.array(
    [
        1,
        66,
        1925,
        32670,
        357423,
        2637558,
        13339535,
        45995730,
        105258076,
        150917976,
        120543840,
        39916800,
        0,
    ],
    dtype=float,
)

Z_SWITCH = 10.0
ASYMPTOTIC_TERMS = 20
TOLERANCE = 1e-10

# Series bookkeeping
SERIES_CHUNK = 64
MAX_SERIES_TERMS = 200_000
MAX_DIGITS = 2000
DIGIT_TIER = 16

QUADRATURE_ERROR_LIMIT = 1e-8


def _is_pole(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def _lanczos_sum(x):
    return np.polyval(LANCZOS_NUMERATOR, x) / np.polyval(LANCZOS_DENOMINATOR, x)


def gamma(x: float) -> float:
    """
    Gamma function. Raises PoleError at 0, -1, -2, ...
    """
    x = float(x)
    if _is_pole(x):
        raise PoleError(f"Gamma has a pole at {x:g}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1 - x))
    base = (x + LANCZOS_G - 0.5) / math.e
    # Split the power in two so it only overflows when the result does
    try:
        half_power = math.pow(base, (x - 0.5) / 2)
        result = float(_lanczos_sum(x)) * half_power * half_power
    except OverflowError:
        raise DomainError(f"Gamma({x:g}) overflows")
    if math.isinf(result):
        raise DomainError(f"Gamma({x:g}) overflows")
    return result


def log_gamma(x: float) -> float:
    """
    Natural log of |Gamma(x)|.
    """
    x = float(x)
    if _is_pole(x):
        raise PoleError(f"Gamma has a pole at {x:g}")
    if x < 0.5:
        return math.log(math.pi / abs(math.sin(math.pi * x))) - log_gamma(1 - x)
    zgh = x + LANCZOS_G - 0.5
    return math.log(float(_lanczos_sum(x))) + (x - 0.5) * (math.log(zgh) - 1)


def _log_gamma_positive(x: np.ndarray) -> np.ndarray:
    """
    Vectorised log Gamma for strictly positive arguments.
    """
    upper = np.where(x >= 0.5, x, 1 - x)
    direct = np.log(_lanczos_sum(upper)) + (upper - 0.5) * (
        np.log(upper + LANCZOS_G - 0.5) - 1
    )
    reflected = math.log(math.pi) - np.log(np.sin(np.pi * np.minimum(x, 0.5))) - direct
    return np.where(x >= 0.5, direct, reflected)


def rgamma(x: float) -> float:
    """
    Reciprocal gamma, 1/Gamma(x). Zero at the poles of Gamma.
    """
    x = float(x)
    if _is_pole(x):
        return 0.0
    if x > 170:
        return math.exp(-log_gamma(x))
    if x < 0.5:
        return math.sin(math.pi * x) * gamma(1 - x) / math.pi
    return 1.0 / gamma(x)


@dataclass(frozen=True)
class MLParams:
    """
    Parameters of the two-parameter Mittag-Leffler function E_{mu,lam}.
    """

    mu: float
    lam: float = 1.0

    def __post_init__(self):
        if not (self.mu > 0 and self.lam > 0):
            raise ParameterError(
                f"Mittag-Leffler parameters must be positive (got mu={self.mu}, lam={self.lam})"
            )


def mittag_leffler(params: MLParams, z: float, tolerance: float = TOLERANCE) -> float:
    """
    E_{mu,lam}(z) for real z, to absolute error `tolerance` wherever the
    value itself is representable.
    """
    z = float(z)
    if z == 0:
        return rgamma(params.lam)
    if z <= -Z_SWITCH and params.mu < 1:
        value, certified = _asymptotic(params, z, tolerance)
        if certified:
            return value
        logger.debug(
            f"Asymptotic expansion uncertified for {params} at z={z:g}, using series"
        )
    return _series(params, z, tolerance)


def _asymptotic(params: MLParams, z: float, tolerance: float) -> tuple[float, bool]:
    total = 0.0
    for k in range(1, ASYMPTOTIC_TERMS + 1):
        total -= z ** (-k) * rgamma(params.lam - params.mu * k)
    omitted = abs(z ** (-(ASYMPTOTIC_TERMS + 1))) * abs(
        rgamma(params.lam - params.mu * (ASYMPTOTIC_TERMS + 1))
    )
    omitted += _exponential_terms(params, z)
    return total, omitted <= tolerance


def _exponential_terms(params: MLParams, z: float) -> float:
    """
    Bounds the conjugate pair (1/mu) w^{1-lam} exp(w), w = (-z)^{1/mu} e^{+-i pi/mu},
    that the algebraic expansion leaves out on the negative axis. They are
    absent for mu <= 2/3 and only negligible far out when mu is close to 1.
    """
    if params.mu <= 2 / 3:
        return 0.0
    x = -z
    root = x ** (1 / params.mu)
    return (
        2
        / params.mu
        * x ** ((1 - params.lam) / params.mu)
        * math.exp(root * math.cos(math.pi / params.mu))
    )


def _series_log_terms(params: MLParams, z: float, tolerance: float) -> np.ndarray:
    """
    Returns log|z^k / Gamma(mu k + lam)| for enough k that the remaining
    tail is below tolerance / 10.
    """
    log_abs_z = math.log(abs(z))
    target = math.log(tolerance / 10)
    count = SERIES_CHUNK
    while count <= MAX_SERIES_TERMS:
        k = np.arange(count, dtype=float)
        logs = k * log_abs_z - _log_gamma_positive(params.mu * k + params.lam)
        step = logs[-1] - logs[-2]
        if step < 0:
            # Past the peak the term ratio only shrinks, so the tail is
            # bounded by a geometric series
            ratio = math.exp(step)
            if logs[-1] + math.log(ratio / (1 - ratio)) < target:
                return logs
        count += SERIES_CHUNK
    raise AccuracyNotAttained(
        f"Mittag-Leffler series for {params} at z={z:g} needs more than {MAX_SERIES_TERMS} terms"
    )


def _series(params: MLParams, z: float, tolerance: float) -> float:
    logs = _series_log_terms(params, z, tolerance)
    peak = float(logs.max())
    if peak > 700:
        if z > 0:
            raise AccuracyNotAttained(
                f"Mittag-Leffler series for {params} at z={z:g} overflows double precision"
            )
        # The terms overflow but their alternating sum does not
        return _series_extended(params, z, len(logs), peak)
    magnitudes = np.exp(logs)
    if z > 0:
        return float(magnitudes.sum())
    k = np.arange(len(logs))
    signs = np.where(k % 2 == 0, 1.0, -1.0)
    # Each term carries the relative error of exponentiating its log
    log_gammas = k * math.log(-z) - logs
    rounding = 8 * np.finfo(float).eps * float(
        (magnitudes * (1 + np.abs(k * math.log(-z)) + np.abs(log_gammas))).sum()
    )
    if rounding <= tolerance:
        return float((signs * magnitudes).sum())
    return _series_extended(params, z, len(logs), peak)


@lru_cache(maxsize=256)
def _extended_coefficients(mu: float, lam: float, dps: int, count: int) -> tuple:
    with mpmath.workdps(dps):
        mu_mp = mpmath.mpf(mu)
        lam_mp = mpmath.mpf(lam)
        return tuple(mpmath.rgamma(mu_mp * k + lam_mp) for k in range(count))


def _series_extended(params: MLParams, z: float, count: int, peak: float) -> float:
    digits = math.ceil(peak / math.log(10)) + 20
    digits = DIGIT_TIER * math.ceil(digits / DIGIT_TIER)
    if digits > MAX_DIGITS:
        raise AccuracyNotAttained(
            f"Mittag-Leffler series for {params} at z={z:g} needs {digits} digits"
        )
    count = SERIES_CHUNK * math.ceil(count / SERIES_CHUNK)
    logger.debug(f"Summing Mittag-Leffler series at {digits} digits ({count} terms)")
    coefficients = _extended_coefficients(params.mu, params.lam, digits, count)
    with mpmath.workdps(digits):
        return float(mpmath.polyval(coefficients[::-1], mpmath.mpf(z)))


def ml_laplace_residual(
    params: MLParams, gamma_coef: float, s: float, horizon: float
) -> float:
    """
    Compares the truncated Laplace transform of t^{lam-1} E_{mu,lam}(-gamma t^mu)
    against its closed form s^{mu-lam} / (s^mu + gamma).

    Substituting u = t^lam removes the endpoint singularity: the integrand
    becomes (1/lam) exp(-s u^{1/lam}) E_{mu,lam}(-gamma u^{mu/lam}).
    """
    if s <= 0 or horizon <= 0:
        raise ParameterError("Laplace residual needs s > 0 and T > 0")
    lam = params.lam

    def integrand(u: float) -> float:
        return (
            math.exp(-s * u ** (1 / lam))
            * mittag_leffler(params, -gamma_coef * u ** (params.mu / lam))
            / lam
        )

    value, error, _, *warning = integrate.quad(
        integrand, 0, horizon**lam, epsabs=1e-12, epsrel=1e-10, limit=200, full_output=1
    )
    # quad warns on round-off it could not beat; only a large error estimate is fatal
    if warning and error > QUADRATURE_ERROR_LIMIT:
        raise QuadratureError(f"Laplace quadrature failed ({error:.2e}): {warning[0]}")
    closed = s ** (params.mu - lam) / (s**params.mu + gamma_coef)
    return abs(value - closed)
