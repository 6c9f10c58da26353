"""Comparison functions: s_lambda, chi and the ratio / volume / mean-curvature bounds."""

import logging
import math
from typing import Tuple

from scipy.integrate import quad

from ..utils.errors import InadmissibleModel
from ..utils.utils import unit_sphere_area
from .views import BoundParams

logger = logging.getLogger(__name__)

LAMBDA_ZERO = 1e-12
SINGULAR_LOCUS = 1e-9
_QUAD_OPTIONS = dict(epsabs=1e-14, epsrel=1e-12, limit=400)


def log_sinh(x: float) -> float:
    """ln sinh(x) for x > 0 without overflow."""
    return x + math.log(-math.expm1(-2.0 * x)) - math.log(2.0)


def s_lambda(t: float, lam: float) -> float:
    if t < 0:
        raise ValueError("t must be non-negative")
    if abs(lam) < LAMBDA_ZERO:
        return float(t)
    if lam > 0:
        root = math.sqrt(lam)
        return math.sin(root * t) / root
    root = math.sqrt(-lam)
    return math.sinh(root * t) / root


def s_lambda_log_derivative(t: float, lam: float) -> float:
    """s'_lambda(t) / s_lambda(t)."""
    if abs(lam) < LAMBDA_ZERO:
        return 1.0 / t
    if lam > 0:
        root = math.sqrt(lam)
        return root / math.tan(root * t)
    root = math.sqrt(-lam)
    return root / math.tanh(root * t)


def log_chi(t: float, k: float, delta: float, n: int) -> float:
    """n (-delta t + ln sinh(k t) - ln k)."""
    if t == 0:
        return -math.inf
    return n * (-delta * t + log_sinh(k * t) - math.log(k))


def chi(t: float, k: float, delta: float, n: int) -> float:
    """(e^{-delta t} sinh(k t) / k)^n."""
    if t < 0 or k <= 0 or n < 1:
        raise ValueError("chi needs t >= 0, k > 0, n >= 1")
    if t == 0:
        return 0.0
    return math.exp(log_chi(t, k, delta, n))


def log_chi_integral(r: float, k: float, delta: float, n: int) -> float:
    """ln of the integral of chi over (0, r), overflow free."""
    top = log_chi(r, k, delta, n)
    value, _ = quad(lambda t: math.exp(log_chi(t, k, delta, n) - top) if t > 0 else 0.0, 0.0, r, **_QUAD_OPTIONS)
    return top + math.log(value)


def chi_ratio(r: float, k: float, delta: float, n: int) -> float:
    """Integral of chi over (0, r) divided by chi(r)."""
    if r <= 0:
        raise ValueError("r must be positive")
    top = log_chi(r, k, delta, n)
    value, _ = quad(lambda t: math.exp(log_chi(t, k, delta, n) - top) if t > 0 else 0.0, 0.0, r, **_QUAD_OPTIONS)
    return value


def _require_gap(k: float, delta: float, label: str):
    if not delta < k:
        raise InadmissibleModel(f"bound needs delta{label} < k{label}, got delta={delta:g}, k={k:g}")


def _one_minus_exp_over(c: float, r: float) -> float:
    """(1 - e^{-c r}) / c, with the limit r at c = 0."""
    if abs(c) < SINGULAR_LOCUS:
        return r
    return -math.expm1(-c * r) / c


def lower_bound_f(r: float, p: BoundParams) -> float:
    """Corrected lower bound f(r) of Vol(B_r) / Area(S_r)."""
    if r <= 0:
        raise ValueError("r must be positive")
    _require_gap(p.k2, p.delta2, "2")
    n, k = p.n, p.k2
    rate = n * (k - p.delta2)
    first = -math.expm1(-rate * r) / rate
    # n (e^{-2kr} - e^{-rate r}) / (rate - 2k); singular locus uses the n r e^{-2kr} limit
    second = n * math.exp(-2.0 * k * r) * _one_minus_exp_over(rate - 2.0 * k, r)
    return (-math.expm1(-2.0 * k * r)) ** (-n) * (first - second)


def upper_bound_F(r: float, p: BoundParams) -> float:
    """Upper bound F(r) = (1 - e^{-n (k1 - delta1) r}) / (n (k1 - delta1))."""
    if r <= 0:
        raise ValueError("r must be positive")
    _require_gap(p.k1, p.delta1, "1")
    rate = p.n * (p.k1 - p.delta1)
    return -math.expm1(-rate * r) / rate


def mean_curvature_bounds(t: float, lam: float, delta: float, dim: int) -> Tuple[float, float]:
    """Mean-curvature bounds of a forward geodesic sphere of radius t."""
    if t <= 0:
        raise ValueError("t must be positive")
    core = (dim - 1) * s_lambda_log_derivative(t, lam)
    return core - (dim - 1) * delta, core + (dim - 1) * delta


def mean_curvature_interval(t: float, p: BoundParams) -> Tuple[float, float]:
    """Bounds under a pinch: lower from (K <= -k1^2, S <= n delta2), upper from (-k2^2, S >= n delta1)."""
    dim = p.n + 1
    lower, _ = mean_curvature_bounds(t, -(p.k1**2), p.delta2, dim)
    _, upper = mean_curvature_bounds(t, -(p.k2**2), -p.delta1, dim)
    return lower, upper


def ball_volume_sandwich(t: float, p: BoundParams) -> Tuple[float, float]:
    """|S^n| times the chi integrals: chi(k1, delta2) below, chi(k2, delta1) above.

    chi grows with k and shrinks with delta, so under k1 <= k2 and
    delta1 <= delta2 the integrand below never exceeds the one above and
    lower <= upper for every t. Pairing chi(k1, delta1) with chi(k2, delta2)
    instead loses that order whenever delta2 - delta1 outweighs k2 - k1.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    area = unit_sphere_area(p.n)
    lower = area * math.exp(log_chi_integral(t, p.k1, p.delta2, p.n))
    upper = area * math.exp(log_chi_integral(t, p.k2, p.delta1, p.n))
    return lower, upper


def log_ball_volume_sandwich(t: float, p: BoundParams) -> Tuple[float, float]:
    log_area = math.log(unit_sphere_area(p.n))
    return (
        log_area + log_chi_integral(t, p.k1, p.delta2, p.n),
        log_area + log_chi_integral(t, p.k2, p.delta1, p.n),
    )


def entropy_bounds(p: BoundParams) -> Tuple[float, float]:
    """Volume-growth entropy sandwich n (k1 - delta1) <= h <= n (k2 - delta2)."""
    return p.n * (p.k1 - p.delta1), p.n * (p.k2 - p.delta2)


def _funk_log_integrand(t: float, n: int) -> float:
    if t == 0:
        return -math.inf
    return n * (-(n + 2) * t / (2.0 * n) + log_sinh(0.5 * t))


def funk_example_ratio(n: int, r: float) -> float:
    """Quadrature of the Funk ratio: integral over (0, r) of (e^{-(n+2)t/(2n)} sinh(t/2))^n over its value at r."""
    if n < 1 or r <= 0:
        raise ValueError("funk_example_ratio needs n >= 1 and r > 0")
    top = _funk_log_integrand(r, n)
    value, _ = quad(lambda t: math.exp(_funk_log_integrand(t, n) - top) if t > 0 else 0.0, 0.0, r, **_QUAD_OPTIONS)
    return value


def funk_ratio_closed_form(n: int, r: float) -> float:
    """(e^r - 1) / (n + 1), the exact value of funk_example_ratio."""
    return math.expm1(r) / (n + 1)
