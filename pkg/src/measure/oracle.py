"""Monte Carlo ball volumes from a direct distance functional."""

import logging
from typing import Tuple

import numpy as np

from ..metric.models import MetricModel
from ..metric.norms import density_values
from ..utils.errors import UnsupportedModel
from ..utils.utils import substream

logger = logging.getLogger(__name__)

_CHORD_NODES, _CHORD_WEIGHTS = np.polynomial.legendre.leggauss(64)
_CHUNK = 8192


def chord_distance(model: MetricModel, p, X) -> np.ndarray:
    """Length of the segment p -> x, integrating F along it (Gauss-Legendre)."""
    p = np.asarray(p, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    s = 0.5 * (_CHORD_NODES + 1.0)
    out = np.empty(len(X))
    for start in range(0, len(X), _CHUNK):
        chunk = X[start:start + _CHUNK]
        direction = chunk - p
        points = p + s[None, :, None] * direction[:, None, :]
        values = model.norm(points, np.broadcast_to(direction[:, None, :], points.shape))
        out[start:start + _CHUNK] = 0.5 * values @ _CHORD_WEIGHTS
    return out


def distances(model: MetricModel, p, X) -> np.ndarray:
    """d(p, x) for a stack of chart points."""
    if model.distance_fn is not None:
        return np.asarray(model.distance_fn(np.asarray(p, dtype=float), X), dtype=float)
    if model.facts.geodesics_are_lines and model.kind != "custom":
        return chord_distance(model, p, X)
    raise UnsupportedModel(f"{model.model_id} has no direct distance functional")


def sampling_box(model: MetricModel, p: np.ndarray, r: float) -> Tuple[np.ndarray, np.ndarray]:
    """Axis-aligned box containing the forward ball B_r(p)."""
    if model.kind == "euclidean":
        return p - r, p + r
    if model.kind == "hyperbolic":
        tau = np.tanh(0.5 * model.k * r)
        norm_p = float(np.linalg.norm(p))
        reach = (norm_p + tau) / (1.0 + norm_p * tau)
        return np.full(model.dim, -reach), np.full(model.dim, reach)
    if model.body is not None:
        extent = np.sqrt(np.diag(np.linalg.inv(model.body.shape)))
        return model.body.center - extent, model.body.center + extent
    raise UnsupportedModel(f"{model.model_id} has no sampling box")


def mc_ball_volume(model: MetricModel, p, r: float, n_samples: int = 100_000, seed: int = 0) -> Tuple[float, float]:
    """Rejection-sampled Vol(B_r(p)), weighted by sigma; returns (estimate, stderr)."""
    if n_samples < 10_000:
        raise ValueError("n_samples must be at least 10^4")
    if r <= 0:
        raise ValueError("r must be positive")
    if model.kind == "custom":
        raise UnsupportedModel("custom models have no direct distance functional")
    p = model.require_point(p)
    low, high = sampling_box(model, p, r)
    box_volume = float(np.prod(high - low))
    samples = low + (high - low) * substream(seed, 5).random((n_samples, model.dim))
    values = np.zeros(n_samples)
    inside = model.is_interior(samples, 0.0)
    candidates = np.flatnonzero(inside)
    reached = distances(model, p, samples[candidates]) < r
    hits = candidates[reached]
    if hits.size:
        values[hits] = density_values(model, samples[hits])
    estimate = box_volume * float(values.mean())
    stderr = box_volume * float(values.std(ddof=1)) / np.sqrt(n_samples)
    logger.info(f"MC ball volume of {model.model_id} at r={r:g}: {estimate:.6g} +/- {stderr:.2g} ({hits.size} hits)")
    return estimate, stderr
