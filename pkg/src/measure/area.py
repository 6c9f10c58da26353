import logging
from typing import Optional

import numpy as np
from scipy.linalg import null_space

from ..metric.models import MetricModel
from ..metric.norms import DEFAULT_SAMPLES, containment_volume, density_values, norm_gradient, tensor_stack
from ..utils.errors import DegenerateSpan, NoConvergence
from ..utils.utils import unit_ball_volume
from .views import AreaFrame

logger = logging.getLogger(__name__)


def _hyperplane_normal(tangent_basis: np.ndarray, dim: int) -> np.ndarray:
    complement = null_space(tangent_basis)
    if tangent_basis.shape != (dim - 1, dim) or complement.shape[1] != 1:
        raise DegenerateSpan(f"{tangent_basis.shape[0]} tangent vectors do not span a hyperplane of R^{dim}")
    return complement[:, 0]


def normal_residual(model: MetricModel, q, normal, tangent_basis) -> float:
    """max_j |g_n(v_j, n)|, using g_n(n, .) = F dF."""
    grad = norm_gradient(model, q, normal)[0]
    value = float(model.norm(q, normal))
    return float(np.max(np.abs(np.atleast_2d(tangent_basis) @ grad))) * value


def normal_vector(
    model: MetricModel,
    q,
    tangent_basis,
    orientation=None,
    tol: float = 1e-10,
    max_iter: int = 60,
) -> np.ndarray:
    """Unit normal n (F(q, n) = 1, g_n(v, n) = 0 for tangents v) by damped Newton."""
    q = model.require_point(q, margin=0.0)
    T = np.atleast_2d(np.asarray(tangent_basis, dtype=float))
    euclidean = _hyperplane_normal(T, model.dim)
    if orientation is not None and float(euclidean @ np.asarray(orientation, dtype=float)) < 0:
        euclidean = -euclidean
    normal = euclidean / float(model.norm(q, euclidean))

    def residual(n):
        grad = norm_gradient(model, q, n)[0]
        return np.concatenate([T @ grad, [float(model.norm(q, n)) - 1.0]]), grad

    res, grad = residual(normal)
    for iteration in range(max_iter):
        value = float(model.norm(q, normal))
        if float(np.max(np.abs(res[:-1]))) * value <= tol and abs(res[-1]) <= 1e-12:
            logger.debug(f"Normal converged after {iteration} Newton steps")
            return normal
        g = tensor_stack(model, q[None, :], normal[None, :])[0]
        hess_f = (g - np.outer(grad, grad)) / value
        jac = np.vstack([T @ hess_f, grad[None, :]])
        step = np.linalg.solve(jac, -res)
        merit = float(np.linalg.norm(res))
        damping = 1.0
        while damping > 1e-4:
            candidate = normal + damping * step
            cand_res, cand_grad = residual(candidate)
            if float(np.linalg.norm(cand_res)) < merit:
                break
            damping *= 0.5
        else:
            # no decrease: the residual sits at the differencing noise floor
            break
        normal, res, grad = candidate, cand_res, cand_grad
    final = normal_residual(model, q, normal, T)
    if final <= tol and abs(float(model.norm(q, normal)) - 1.0) <= 1e-12:
        return normal
    raise NoConvergence(f"normal vector residual {final:.3e} after {max_iter} Newton steps at q={q}")


def zeta_factor(
    model: MetricModel,
    frame: AreaFrame,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    method: str = "auto",
) -> float:
    """Induced-volume correction; identically 1 for Riemannian models."""
    if method == "auto" and model.facts.is_riemannian:
        return 1.0
    d = model.dim
    full = containment_volume(model, frame.q, frame.basis, samples, seed)
    slice_volume = containment_volume(model, frame.q, frame.tangent_basis, samples, seed)
    return (unit_ball_volume(d) / full) * (slice_volume / unit_ball_volume(d - 1))


def area_density(
    model: MetricModel,
    frame: AreaFrame,
    span,
    method: str = "interior",
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    tol_gram: float = 1e-14,
    zeta: Optional[float] = None,
) -> float:
    """dA_F evaluated on the parallelepiped spanned by ``span`` (d - 1 tangent vectors)."""
    span = np.atleast_2d(np.asarray(span, dtype=float))
    d = model.dim
    if span.shape != (d - 1, d):
        raise DegenerateSpan(f"span must hold {d - 1} vectors of dimension {d}")
    gram = float(np.linalg.det(span @ span.T))
    scale = float(np.prod(np.sum(span**2, axis=1)))
    if gram <= tol_gram * max(scale, 1e-300):
        raise DegenerateSpan("span vectors are linearly dependent")
    q = model.require_point(frame.q, margin=0.0)
    if method == "interior":
        # zeta * dV of the slice reduces to sigma(q) |det[n, span]|
        sigma = float(density_values(model, q[None, :], samples, seed)[0])
        return sigma * abs(float(np.linalg.det(np.vstack([frame.normal, span]))))
    if method == "containment":
        zeta = zeta_factor(model, frame, samples, seed) if zeta is None else zeta
        slice_volume = containment_volume(model, q, span, samples, seed)
        return zeta * unit_ball_volume(d - 1) / slice_volume
    raise ValueError(f"unknown area method: {method}")
