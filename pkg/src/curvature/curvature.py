import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..geodesic.connection import connection_jacobian, geodesic_states, spray_values, x_step
from ..metric.models import MetricModel, require_vector
from ..metric.norms import density_values, sigma_density, tensor_stack
from ..utils import numdiff
from ..utils.errors import DegenerateFlag, NumericalNoise

logger = logging.getLogger(__name__)

# one-sided 5-point first derivative, O(h^4)
_FORWARD_WEIGHTS = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0


@dataclass
class FlagInput:
    """Flag (P, y) at x with P = span{y, u}."""

    x: np.ndarray
    y: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = require_vector(self.y)
        self.u = require_vector(self.u)


def _riemann_from_spray(model: MetricModel, x, y, scheme: str) -> np.ndarray:
    """Nested central differences of G."""

    def spray_y(ys):
        return spray_values(model, np.broadcast_to(x, ys.shape), ys, scheme)

    def spray_xy(xs, ys):
        return spray_values(model, xs, ys, scheme)

    G = spray_y(y[None, :])[0]
    hx1 = x_step(model, x, numdiff.first_order_step(x))
    hx2 = x_step(model, x, numdiff.second_order_step(x))
    dGx = numdiff.jacobian(lambda xs: spray_values(model, xs, np.broadcast_to(y, xs.shape), scheme), x, hx1)
    mixed = numdiff.mixed_jacobian(spray_xy, x, y, hx2, numdiff.second_order_step(y))
    hess_y = numdiff.hessian(spray_y, y)
    N = numdiff.jacobian(spray_y, y)
    return (
        2.0 * dGx
        - np.einsum("j,ijk->ik", y, mixed)
        + 2.0 * np.einsum("j,ijk->ik", G, hess_y)
        - N @ N
    )


def _riemann_from_connection(model: MetricModel, x, y, scheme: str) -> np.ndarray:
    """Same four terms with the second derivatives taken from N."""
    G = spray_values(model, x[None, :], y[None, :], scheme)[0]
    N = connection_jacobian(model, x, y, scheme)
    hx1 = x_step(model, x, numdiff.first_order_step(x))
    hx2 = x_step(model, x, numdiff.second_order_step(x))
    dGx = numdiff.jacobian(lambda xs: spray_values(model, xs, np.broadcast_to(y, xs.shape), scheme), x, hx1)

    def n_of_x(xs):
        return np.stack([connection_jacobian(model, xi, y, scheme) for xi in xs])

    def n_of_y(ys):
        return np.stack([connection_jacobian(model, x, yi, scheme) for yi in ys])

    dNx = numdiff.jacobian(n_of_x, x, hx2)  # [i, k, j] = dN^i_k / dx^j
    dNy = numdiff.jacobian(n_of_y, y, numdiff.second_order_step(y))  # [i, k, j] = dN^i_k / dy^j
    return (
        2.0 * dGx
        - np.einsum("ikj,j->ik", dNx, y)
        + 2.0 * np.einsum("ikj,j->ik", dNy, G)
        - N @ N
    )


def riemann_curvature(
    model: MetricModel,
    x,
    y,
    tol_curv: float = 1e-3,
    scheme: str = "auto",
    cross_check: bool = True,
) -> np.ndarray:
    """Riemann curvature transform R^i_k(x, y), acting on u by R @ u."""
    x = model.require_point(x)
    y = require_vector(y)
    R = _riemann_from_spray(model, x, y, scheme)
    if cross_check:
        other = _riemann_from_connection(model, x, y, scheme)
        gap = float(np.max(np.abs(R - other)))
        if gap > 10.0 * tol_curv * max(1.0, float(np.max(np.abs(R)))):
            raise NumericalNoise(f"Riemann curvature schemes disagree by {gap:.3e} at x={x}, y={y}")
    flagpole = float(np.max(np.abs(R @ y)))
    if flagpole > tol_curv * max(1.0, float(np.linalg.norm(y))):
        logger.warning(f"R_y(y) = {flagpole:.3e} at x={x}, y={y}")
    return R


def flag_curvature(flag: FlagInput, model: MetricModel, riemann: Optional[np.ndarray] = None, tol_gram: float = 1e-10) -> float:
    """K(P, y) = g_y(R_y(u), u) / (g_y(y, y) g_y(u, u) - g_y(y, u)^2)."""
    x = model.require_point(flag.x)
    y, u = flag.y, flag.u
    g = tensor_stack(model, x[None, :], y[None, :])[0]
    gyy, guu, gyu = float(y @ g @ y), float(u @ g @ u), float(y @ g @ u)
    gram = gyy * guu - gyu**2
    if gram <= tol_gram * gyy * guu:
        raise DegenerateFlag(f"flag edge {u} is (nearly) parallel to the flagpole {y}")
    R = riemann_curvature(model, x, y) if riemann is None else riemann
    return float((R @ u) @ g @ u) / gram


def ricci(model: MetricModel, x, y, tol_curv: float = 1e-3) -> float:
    return float(np.trace(riemann_curvature(model, x, y, tol_curv)))


def distortion(model: MetricModel, x, y, samples: int = 65536, seed: int = 0) -> float:
    """tau = ln(sqrt(det g_y) / sigma_F)."""
    x = model.require_point(x)
    y = require_vector(y)
    g = tensor_stack(model, x[None, :], y[None, :])[0]
    sigma = sigma_density(model, x, samples, seed)
    return 0.5 * float(np.log(np.linalg.det(g))) - float(np.log(sigma))


def _distortion_values(model: MetricModel, X, Y, samples: int, seed: int) -> np.ndarray:
    g = tensor_stack(model, X, Y)
    return 0.5 * np.log(np.linalg.det(g)) - np.log(density_values(model, X, samples, seed))


def distortion_rate(model: MetricModel, x, y, h: float = 1e-3, samples: int = 65536, seed: int = 0) -> float:
    """d/dt tau(c(t), c'(t)) at t = 0 along the geodesic with c'(0) = y."""
    x = model.require_point(x)
    y = require_vector(y)
    h = h / float(model.norm(x, y))
    points, velocities = [x], [y]
    for step in range(1, len(_FORWARD_WEIGHTS)):
        p, v = geodesic_states(model, x[None, :], y[None, :], step * h)
        points.append(p[0])
        velocities.append(v[0])
    tau = _distortion_values(model, np.array(points), np.array(velocities), samples, seed)
    return float(_FORWARD_WEIGHTS @ tau) / h


def s_curvature(
    model: MetricModel,
    x,
    y,
    cross_check: bool = True,
    tol: float = 1e-3,
    samples: int = 65536,
    seed: int = 0,
) -> float:
    """S = N^m_m - (y^m / sigma) d sigma / dx^m."""
    x = model.require_point(x)
    y = require_vector(y)
    N = connection_jacobian(model, x, y)
    sigma = float(density_values(model, x[None, :], samples, seed)[0])
    h = x_step(model, x, numdiff.first_order_step(x))
    d_sigma = numdiff.jacobian(lambda xs: density_values(model, xs, samples, seed), x, h)
    value = float(np.trace(N)) - float(y @ d_sigma) / sigma
    if cross_check:
        rate = distortion_rate(model, x, y, samples=samples, seed=seed)
        if abs(rate - value) > tol * max(1.0, abs(value)):
            raise NumericalNoise(f"S-curvature {value:.6g} disagrees with the distortion rate {rate:.6g}")
    return value
