import logging
import math
from typing import Optional

import numpy as np
from scipy.stats import qmc

from ..utils import numdiff
from ..utils.errors import DegenerateTensor
from ..utils.utils import substream, unit_ball_volume
from .models import MetricModel, require_vector
from .views import MinkowskiData

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 65536


def eval_norm(model: MetricModel, x, y):
    """F(x, y); exactly 0 for the zero vector. ``y`` may be a stack (m, d)."""
    x = model.require_point(x)
    y = np.asarray(y, dtype=float)
    values = model.norm(x, y)
    values = np.where(np.all(y == 0.0, axis=-1), 0.0, values)
    return float(values) if y.ndim == 1 else values


def tensor_stack(model: MetricModel, X, Y) -> np.ndarray:
    """Fundamental tensors g_y for stacks X, Y of shape (m, d); returns (m, d, d)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    X, Y = np.broadcast_arrays(X, Y)
    if model.tensor_fn is not None:
        return np.asarray(model.tensor_fn(X, Y), dtype=float)
    out = np.empty(Y.shape + (model.dim,))
    for i, (x, y) in enumerate(zip(X, Y)):

        def energy(ys, x=x):
            return 0.5 * model.norm(x, ys) ** 2

        hess = numdiff.hessian(energy, y)
        out[i] = 0.5 * (hess + hess.T)
    return out


def norm_gradient(model: MetricModel, X, Y) -> np.ndarray:
    """y-gradient of F for stacks (m, d), one batched stencil evaluation."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    X, Y = np.broadcast_arrays(X, Y)
    if model.tensor_fn is not None:
        # Riemannian hooks: dF/dy = g y / F
        g = model.tensor_fn(X, Y)
        return np.einsum("mij,mj->mi", g, Y) / model.norm(X, Y)[:, None]
    m, d = Y.shape
    h = numdiff.FIRST_ORDER_STEP * (1.0 + np.linalg.norm(Y, axis=-1))
    eye = np.eye(d)
    offsets = h[:, None, None] * eye[None, :, :]
    stencil = [Y[:, None, :] + offsets, Y[:, None, :] - offsets,
               Y[:, None, :] + 0.5 * offsets, Y[:, None, :] - 0.5 * offsets]
    points = np.concatenate([s.reshape(-1, d) for s in stencil])
    values = model.norm(np.tile(np.repeat(X, d, axis=0), (4, 1)), points)
    plus, minus, half_plus, half_minus = (v.reshape(m, d) for v in np.split(values, 4))
    coarse = (plus - minus) / (2.0 * h[:, None])
    fine = (half_plus - half_minus) / h[:, None]
    return numdiff.richardson(coarse, fine)


def fundamental_tensor(
    model: MetricModel,
    x,
    y,
    tol_pd: float = 1e-12,
    tol_identity: float = 1e-8,
    epsilon_zero: float = 1e-9,
) -> MinkowskiData:
    """g_y at (x, y): the y-Hessian of F^2 / 2."""
    x = model.require_point(x)
    y = require_vector(y, epsilon_zero)
    g = tensor_stack(model, x[None, :], y[None, :])[0]
    value = float(model.norm(x, y))
    data = MinkowskiData(F=value, g=g)
    smallest = data.min_eigenvalue
    if smallest <= tol_pd:
        raise DegenerateTensor(f"fundamental tensor has min eigenvalue {smallest:.3e} at x={x}, y={y}")
    residual = abs(float(y @ g @ y) - value**2)
    if residual > tol_identity * value**2:
        logger.warning(f"Norm-tensor identity off by {residual / value**2:.3e} (relative) at x={x}, y={y}")
    return data


def strong_convexity_report(model: MetricModel, x, num_dirs: int, seed: int) -> float:
    """Min eigenvalue of g over seeded unit directions; non-positive values are reported, not raised."""
    if num_dirs < 1:
        raise ValueError("num_dirs must be at least 1")
    x = model.require_point(x)
    directions = substream(seed, 1).standard_normal((num_dirs, model.dim))
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    g = tensor_stack(model, np.broadcast_to(x, directions.shape), directions)
    smallest = float(np.linalg.eigvalsh(g).min())
    logger.debug(f"Strong convexity at {x}: min eigenvalue {smallest:.6g} over {num_dirs} directions")
    return smallest


def outer_radius(model: MetricModel, x, basis=None, directions: int = 4096, seed: int = 0) -> float:
    """Bound on the coefficient radius of {c : F(x, c @ basis) < 1}."""
    basis = np.eye(model.dim) if basis is None else np.asarray(basis, dtype=float)
    k = basis.shape[0]
    if k == 1:
        units = np.array([[1.0], [-1.0]])
    elif k == 2:
        angles = np.linspace(0.0, 2.0 * np.pi, directions, endpoint=False)
        units = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    else:
        units = substream(seed, 2).standard_normal((directions, k))
        units /= np.linalg.norm(units, axis=-1, keepdims=True)
    radii = 1.0 / model.norm(np.asarray(x, dtype=float), units @ basis)
    return 1.1 * float(radii.max())


def containment_volume(
    model: MetricModel,
    x,
    basis=None,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> float:
    """Volume of {c : F(x, c @ basis) < 1} in coefficient coordinates (scrambled Sobol)."""
    x = np.asarray(x, dtype=float)
    basis = np.eye(model.dim) if basis is None else np.asarray(basis, dtype=float)
    k = basis.shape[0]
    radius = outer_radius(model, x, basis, seed=seed)
    engine = qmc.Sobol(d=k, scramble=True, seed=substream(seed, 3, k))
    unit = engine.random_base2(m=int(math.ceil(math.log2(samples))))
    coefficients = (2.0 * unit - 1.0) * radius
    inside = model.norm(x, coefficients @ basis) < 1.0
    return float(inside.mean() * (2.0 * radius) ** k)


def indicatrix_volume(model: MetricModel, x, samples: int = DEFAULT_SAMPLES, seed: int = 0, basis=None) -> float:
    """Euclidean volume of B_x = {y : F(x, y) < 1}, measured through ``basis``."""
    if samples < 1000:
        raise ValueError("samples must be at least 1000")
    x = model.require_point(x)
    basis = np.eye(model.dim) if basis is None else np.asarray(basis, dtype=float)
    volume = containment_volume(model, x, basis, samples, seed)
    return volume * abs(float(np.linalg.det(basis)))


def sigma_density(
    model: MetricModel,
    x,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    method: str = "auto",
    basis=None,
) -> float:
    """Busemann-Hausdorff density Vol_E(unit ball) / Vol_E(B_x)."""
    x = model.require_point(x)
    if method == "auto":
        if model.density_fn is not None:
            return float(model.density_fn(x[None, :])[0])
        method = "riemannian" if model.facts.is_riemannian else "containment"
    if method == "riemannian":
        g = tensor_stack(model, x[None, :], np.eye(model.dim)[:1])[0]
        return float(np.sqrt(np.linalg.det(g)))
    if method == "containment":
        return unit_ball_volume(model.dim) / indicatrix_volume(model, x, samples, seed, basis)
    raise ValueError(f"unknown density method: {method}")


def density_values(model: MetricModel, X, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> np.ndarray:
    """sigma at a stack of points; no margin check beyond strict interiority."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if model.density_fn is not None:
        return np.asarray(model.density_fn(X), dtype=float)
    if model.facts.is_riemannian:
        g = tensor_stack(model, X, np.broadcast_to(np.eye(model.dim)[0], X.shape))
        return np.sqrt(np.linalg.det(g))
    return np.array([
        unit_ball_volume(model.dim) / (containment_volume(model, x, None, samples, seed))
        for x in X
    ])
