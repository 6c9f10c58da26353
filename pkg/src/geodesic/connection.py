import logging
from typing import Optional, Tuple

import numpy as np

from ..metric.models import MetricModel, require_vector
from ..metric.norms import tensor_stack
from ..utils import numdiff
from ..utils.errors import DomainExit
from ..utils.utils import parallel_map
from .integrator import integrate
from .views import GeodesicPath, StepControl

logger = logging.getLogger(__name__)


def x_step(model: MetricModel, x, base: float) -> float:
    """Finite-difference step in x, kept clear of the domain boundary."""
    return min(base, 0.25 * model.clearance(x))


def _energy(model: MetricModel):
    def energy(X, Y):
        return model.norm(X, Y) ** 2

    return energy


def _numeric_spray(model: MetricModel, x: np.ndarray, y: np.ndarray, scheme: str) -> np.ndarray:
    g = tensor_stack(model, x[None, :], y[None, :])[0]
    g_inv = np.linalg.inv(g)
    hx = x_step(model, x, numdiff.second_order_step(x))
    if scheme == "contracted":
        # 1/4 g^{il} ([F^2]_{x^k y^l} y^k - [F^2]_{x^l}), equal to the displayed form by Euler's identity
        energy = _energy(model)
        hy = numdiff.second_order_step(y)
        mixed = numdiff.mixed_jacobian(energy, x, y, hx, hy)
        grad_x = numdiff.jacobian(lambda xs: energy(xs, np.broadcast_to(y, xs.shape)), x, x_step(model, x, numdiff.first_order_step(x)))
        bracket = mixed.T @ y - grad_x
        return 0.25 * g_inv @ bracket
    if scheme == "literal":
        # 1/4 g^{il} (2 dg_{jl}/dx^k - dg_{jk}/dx^l) y^j y^k
        dg = numdiff.jacobian(lambda xs: tensor_stack(model, xs, np.broadcast_to(y, xs.shape)), x, hx)
        first = 2.0 * np.einsum("jlk,j,k->l", dg, y, y)
        second = np.einsum("jkl,j,k->l", dg, y, y)
        return 0.25 * g_inv @ (first - second)
    raise ValueError(f"unknown geodesic-coefficient scheme: {scheme}")


def spray_values(model: MetricModel, X, Y, scheme: str = "auto") -> np.ndarray:
    """G for stacks of points and directions, shape (m, d); no argument checks."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    X, Y = np.broadcast_arrays(X, Y)
    if scheme == "auto":
        if model.spray_fn is not None:
            return np.asarray(model.spray_fn(X, Y), dtype=float)
        scheme = "contracted"
    return np.stack([_numeric_spray(model, x, y, scheme) for x, y in zip(X, Y)])


def geodesic_coefficients(model: MetricModel, x, y, scheme: str = "auto", epsilon_zero: float = 1e-9) -> np.ndarray:
    """The d spray values G^i(x, y)."""
    x = model.require_point(x)
    y = require_vector(y, epsilon_zero)
    return spray_values(model, x[None, :], y[None, :], scheme)[0]


def connection_jacobian(model: MetricModel, x: np.ndarray, y: np.ndarray, scheme: str = "auto") -> np.ndarray:
    """N^i_j = dG^i / dy^j without argument checks."""
    return numdiff.jacobian(lambda ys: spray_values(model, np.broadcast_to(x, ys.shape), ys, scheme), y)


def connection_coefficients(model: MetricModel, x, y, scheme: str = "auto", epsilon_zero: float = 1e-9) -> np.ndarray:
    """N^i_j(x, y) as a (d, d) matrix, row i, column j."""
    x = model.require_point(x)
    y = require_vector(y, epsilon_zero)
    N = connection_jacobian(model, x, y, scheme)
    G = spray_values(model, x[None, :], y[None, :], scheme)[0]
    euler = float(np.max(np.abs(N @ y - 2.0 * G)))
    if euler > 1e-6 * (1.0 + float(np.max(np.abs(G)))):
        logger.warning(f"Euler identity N y = 2G off by {euler:.3e} at x={x}, y={y}")
    return N


def covariant_derivative(model: MetricModel, x, y, U_value, dU_along_y, scheme: str = "auto") -> np.ndarray:
    """D_y U = dU^i + U^j N^i_j(x, y)."""
    N = connection_coefficients(model, x, y, scheme)
    return np.asarray(dU_along_y, dtype=float) + N @ np.asarray(U_value, dtype=float)


def integrate_geodesic(
    model: MetricModel,
    x0,
    y0,
    T: float,
    ctrl: Optional[StepControl] = None,
    tol_geo: float = 1e-6,
    scheme: str = "auto",
) -> GeodesicPath:
    """Solve x'' + 2 G(x, x') = 0 from (x0, y0) on [0, T].

    A path that reaches the domain margin is returned truncated with its flag set.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    ctrl = ctrl or StepControl()
    x0 = model.require_point(x0)
    y0 = require_vector(y0)
    d = model.dim

    def rhs(t, z):
        x, v = z[:d], z[d:]
        if not model.is_interior(x, 0.0):
            return np.full(2 * d, np.nan)
        return np.concatenate([v, -2.0 * spray_values(model, x[None, :], v[None, :], scheme)[0]])

    def inside(z):
        return bool(model.is_interior(z[:d]))

    traj = integrate(rhs, np.concatenate([x0, y0]), T, ctrl, inside)
    states = np.array(traj.states)
    points, velocities = states[:, :d], states[:, d:]
    speeds = model.norm(points, velocities)
    drift = float(np.max(np.abs(speeds - speeds[0])) / speeds[0])
    path = GeodesicPath(
        times=np.array(traj.times),
        points=points,
        velocities=velocities,
        speed_drift=drift,
        flagged=drift > tol_geo or traj.truncated,
        truncated=traj.truncated,
        accepted_steps=traj.accepted,
        rejected_steps=traj.rejected,
        speeds=speeds,
    )
    if traj.truncated:
        logger.warning(f"Geodesic from {x0} left the {model.model_id} domain at t={path.times[-1]:.6g} < {T:.6g}")
    elif drift > tol_geo:
        logger.warning(f"Geodesic speed drift {drift:.3e} exceeds {tol_geo:g}")
    return path


def geodesic_states(
    model: MetricModel,
    P,
    Y,
    t: float,
    method: str = "auto",
    ctrl: Optional[StepControl] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Points and velocities of t -> exp_p(t y) for stacks P, Y of shape (m, d)."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    P, Y = np.broadcast_arrays(P, Y)
    if t == 0:
        return P.copy(), Y.copy()
    if method == "auto" and model.geodesic_fn is not None:
        # hooks are unit speed and take one time per row; rescale by c = F(p, y)
        speed = model.norm(P, Y)
        points, velocities = model.geodesic_fn(P, Y / speed[:, None], (speed * t)[:, None])
        velocities = velocities * speed[:, None]
        if not np.all(model.is_interior(points, 0.0)):
            raise DomainExit(f"geodesic reached the {model.model_id} boundary before t={t:g}")
        return points, velocities

    def solve(pair):
        p, y = pair
        path = integrate_geodesic(model, p, y, t, ctrl)
        if path.truncated:
            raise DomainExit(f"geodesic from {p} left the domain at t={path.times[-1]:.6g}", path=path)
        return path.endpoint, path.end_velocity

    results = parallel_map(solve, list(zip(P, Y)))
    return np.array([r[0] for r in results]), np.array([r[1] for r in results])


def geodesic_state(model: MetricModel, p, y, t: float, method: str = "auto", ctrl: Optional[StepControl] = None):
    p = model.require_point(p)
    y = require_vector(y)
    points, velocities = geodesic_states(model, p[None, :], y[None, :], t, method, ctrl)
    return points[0], velocities[0]


def exp_map(model: MetricModel, p, y, t: float, method: str = "auto", ctrl: Optional[StepControl] = None) -> np.ndarray:
    """exp_p(t y); exp_p(0) = p exactly."""
    if t < 0:
        raise ValueError("only forward geodesics (t >= 0) are defined")
    p = model.require_point(p)
    if t == 0:
        return p.copy()
    return geodesic_state(model, p, y, t, method, ctrl)[0]
