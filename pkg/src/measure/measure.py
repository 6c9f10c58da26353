"""Radial area density, sphere areas, ball volumes and sphere mean curvature."""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from ..geodesic.connection import geodesic_states
from ..metric.models import MetricModel, require_vector
from ..metric.norms import density_values, norm_gradient
from ..utils import numdiff
from ..utils.errors import InvalidConfig
from ..utils.utils import orthonormal_complement
from .area import normal_vector
from .views import DirectionQuadrature

logger = logging.getLogger(__name__)

ETA_STEP = 1e-4
ETA_HALVING = 1e-3
# Gauss-Legendre rule used on every co-area panel
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_MAX_PANEL = 0.5
_MAX_DEPTH = 12


def _log_eta_nodes(
    model: MetricModel,
    p: np.ndarray,
    nodes: np.ndarray,
    t: float,
    h: float,
    normal: str,
    method: str = "auto",
) -> Tuple[np.ndarray, np.ndarray]:
    """ln eta at steps h and h/2 for every node."""
    m, d = nodes.shape
    tangents = orthonormal_complement(norm_gradient(model, p, nodes))  # (m, d-1, d)
    steps = np.array([h, -h, h / 2, -h / 2, h / 4, -h / 4])
    varied = nodes[:, None, None, :] + steps[None, None, :, None] * tangents[:, :, None, :]
    varied = varied.reshape(-1, d)
    varied /= model.norm(np.broadcast_to(p, varied.shape), varied)[:, None]
    directions = np.concatenate([nodes, varied])
    points, velocities = geodesic_states(model, np.broadcast_to(p, directions.shape), directions, t, method)
    q, radial = points[:m], velocities[:m]
    moved = points[m:].reshape(m, d - 1, len(steps), d)

    def jacobi(k):
        a, b = steps[2 * k], steps[2 * k + 2]
        coarse = (moved[:, :, 2 * k] - moved[:, :, 2 * k + 1]) / (2 * a)
        fine = (moved[:, :, 2 * k + 2] - moved[:, :, 2 * k + 3]) / (2 * b)
        return numdiff.richardson(coarse, fine)

    if normal == "radial":
        normals = radial
    elif normal == "newton":
        normals = np.array([normal_vector(model, qi, Ji, orientation=vi) for qi, Ji, vi in zip(q, jacobi(0), radial)])
    else:
        raise ValueError(f"unknown normal mode: {normal}")

    sigma_q = density_values(model, q)
    sigma_p = float(density_values(model, p[None, :])[0])
    _, log_base = np.linalg.slogdet(np.concatenate([nodes[:, None, :], tangents], axis=1))
    logs = []
    for k in (0, 1):
        J = jacobi(k)
        _, log_moved = np.linalg.slogdet(np.concatenate([normals[:, None, :], J], axis=1))
        logs.append(np.log(sigma_q) + log_moved - np.log(sigma_p) - log_base)
    return logs[0], logs[1]


def log_eta_nodes(
    model: MetricModel,
    p,
    nodes,
    t: float,
    h: float = ETA_STEP,
    halving_tol: float = ETA_HALVING,
    normal: str = "radial",
    method: str = "auto",
) -> np.ndarray:
    """ln eta_t(y) for a stack of unit nodes, evaluated in one batch.

    ``method`` is passed to geodesic_states: "auto" uses a closed-form
    geodesic when the model has one, "integrate" always solves the spray ODE.
    """
    p = np.asarray(p, dtype=float)
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    coarse, fine = _log_eta_nodes(model, p, nodes, t, h, normal, method)
    flagged = np.abs(np.expm1(fine - coarse)) > halving_tol
    if np.any(flagged):
        logger.warning(
            f"eta at t={t:.6g} changed by more than {halving_tol:g} under step halving on "
            f"{int(flagged.sum())} of {len(nodes)} directions"
        )
    return coarse


def eta_nodes(
    model: MetricModel, p, nodes, t: float, h: float = ETA_STEP, halving_tol: float = ETA_HALVING, normal: str = "radial", method: str = "auto"
) -> np.ndarray:
    return np.exp(log_eta_nodes(model, p, nodes, t, h, halving_tol, normal, method))


def eta(
    model: MetricModel, p, y, t: float, h: float = ETA_STEP, normal: str = "radial", unit_tol: float = 1e-9, method: str = "auto"
) -> float:
    """eta_t(y) = dA_t(J_1, ..., J_{d-1}) / dA_p(v_1, ..., v_{d-1})."""
    if t <= 0:
        raise ValueError("t must be positive")
    p = model.require_point(p)
    y = require_vector(y)
    speed = float(model.norm(p, y))
    if abs(speed - 1.0) > unit_tol:
        raise InvalidConfig([("y", f"eta needs F(p, y) = 1, got {speed:.12g}")])
    return float(eta_nodes(model, p, y[None, :], t, h, normal=normal, method=method)[0])


def _quadrature_base(p, quad: DirectionQuadrature) -> np.ndarray:
    """The quadrature is built at one base point; p must be that point."""
    p = np.asarray(p, dtype=float)
    if p.shape != quad.p.shape or not np.allclose(p, quad.p, rtol=0.0, atol=1e-12):
        raise InvalidConfig([("p", f"quadrature was built at {quad.p.tolist()}, not at {p.tolist()}")])
    return quad.p


def log_sphere_area(
    model: MetricModel,
    p,
    t: float,
    quad: DirectionQuadrature,
    h: float = ETA_STEP,
    halving_tol: float = ETA_HALVING,
    method: str = "auto",
) -> float:
    if t <= 0:
        raise ValueError("t must be positive")
    p = _quadrature_base(p, quad)
    log_eta = log_eta_nodes(model, p, quad.nodes, t, h, halving_tol, method=method)
    return float(logsumexp(log_eta, b=quad.weights))


def sphere_area(
    model: MetricModel,
    p,
    t: float,
    quad: DirectionQuadrature,
    h: float = ETA_STEP,
    halving_tol: float = ETA_HALVING,
    method: str = "auto",
) -> float:
    """Area of the forward geodesic sphere S_t(p): sum_a w_a eta_t(y_a)."""
    return float(np.exp(log_sphere_area(model, p, t, quad, h, halving_tol, method)))


def _panels(radii: Sequence[float]) -> list:
    """Graded panels near 0 (where Area ~ t^{d-1}) then panels of width <= _MAX_PANEL."""
    top = float(max(radii))
    breaks = {0.0, *map(float, radii)}
    edge = min(_MAX_PANEL, top) / 64.0
    while edge < min(_MAX_PANEL, top):
        breaks.add(edge)
        edge *= 2.0
    breaks.update(np.arange(_MAX_PANEL, top, _MAX_PANEL).tolist())
    ordered = sorted(b for b in breaks if b <= top)
    return list(zip(ordered[:-1], ordered[1:]))


def _log_panel(log_area, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    ts = a + half * (_GL_NODES + 1.0)
    return float(logsumexp([log_area(t) for t in ts], b=half * _GL_WEIGHTS))


def _log_panel_adaptive(log_area, a: float, b: float, rtol: float, whole: Optional[float] = None, depth: int = 0) -> float:
    whole = _log_panel(log_area, a, b) if whole is None else whole
    mid = 0.5 * (a + b)
    left = _log_panel(log_area, a, mid)
    right = _log_panel(log_area, mid, b)
    split = float(np.logaddexp(left, right))
    if abs(np.expm1(split - whole)) <= rtol or depth >= _MAX_DEPTH:
        return split
    return float(np.logaddexp(
        _log_panel_adaptive(log_area, a, mid, rtol, left, depth + 1),
        _log_panel_adaptive(log_area, mid, b, rtol, right, depth + 1),
    ))


def log_ball_volume_profile(
    model: MetricModel,
    p,
    radii: Sequence[float],
    quad: DirectionQuadrature,
    h: float = ETA_STEP,
    rtol: float = 1e-7,
    halving_tol: float = ETA_HALVING,
    method: str = "auto",
) -> np.ndarray:
    """ln Vol(B_r) for every r in ``radii`` from one cumulative co-area integral."""
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    p = _quadrature_base(p, quad)

    def log_area(t):
        return log_sphere_area(model, p, t, quad, h, halving_tol, method)

    cumulative = {0.0: -np.inf}
    running = -np.inf
    for a, b in _panels(radii):
        running = float(np.logaddexp(running, _log_panel_adaptive(log_area, a, b, rtol)))
        cumulative[b] = running
    return np.array([cumulative[float(r)] for r in radii])


def ball_volume_profile(
    model: MetricModel,
    p,
    radii: Sequence[float],
    quad: DirectionQuadrature,
    h: float = ETA_STEP,
    rtol: float = 1e-7,
    halving_tol: float = ETA_HALVING,
    method: str = "auto",
) -> np.ndarray:
    return np.exp(log_ball_volume_profile(model, p, radii, quad, h, rtol, halving_tol, method))


def log_ball_volume(
    model: MetricModel, p, r: float, quad: DirectionQuadrature, h: float = ETA_STEP, rtol: float = 1e-7, method: str = "auto"
) -> float:
    return float(log_ball_volume_profile(model, p, [r], quad, h, rtol, method=method)[0])


def ball_volume(
    model: MetricModel, p, r: float, quad: DirectionQuadrature, h: float = ETA_STEP, rtol: float = 1e-7, method: str = "auto"
) -> float:
    """Vol(B_r(p)) = integral of sphere_area over (0, r)."""
    if r <= 0:
        raise ValueError("r must be positive")
    return float(np.exp(log_ball_volume(model, p, r, quad, h, rtol, method)))


def mean_curvature_sphere(
    model: MetricModel, p, y, t: float, h: float = ETA_STEP, rel_step: float = 1e-3, method: str = "auto"
) -> float:
    """Pi_t = d/dt ln eta_t(y) by a Richardson central difference in t."""
    if t <= 0:
        raise ValueError("t must be positive")
    p = model.require_point(p)
    y = require_vector(y)
    y = y[None, :]
    dt = rel_step * t

    def log_eta(s):
        return float(log_eta_nodes(model, p, y, s, h, halving_tol=np.inf, method=method)[0])

    return float(numdiff.derivative(log_eta, t, dt))
