import logging
import math
from typing import Optional

import numpy as np

from ..metric.models import MetricModel
from ..metric.norms import density_values
from ..utils.default_config_settings import default_resolution
from ..utils.utils import rotation_matrix, substream, unit_sphere_area
from .views import DirectionQuadrature

logger = logging.getLogger(__name__)

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


def euclidean_sphere_nodes(dim: int, resolution: int, seed: int):
    """Unit-sphere nodes in R^dim with scheme weights; returns (nodes, weights, scheme)."""
    area = unit_sphere_area(dim - 1)
    if dim == 2:
        offset = substream(seed, 4).uniform()
        angles = 2.0 * np.pi * (np.arange(resolution) + offset) / resolution
        nodes = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
        return nodes, np.full(resolution, area / resolution), "trapezoid"
    if dim == 3:
        index = np.arange(resolution)
        z = 1.0 - (2.0 * index + 1.0) / resolution
        azimuth = 2.0 * np.pi * index / GOLDEN_RATIO
        ring = np.sqrt(1.0 - z**2)
        nodes = np.stack([ring * np.cos(azimuth), ring * np.sin(azimuth), z], axis=-1)
        nodes = nodes @ rotation_matrix(3, seed).T
        return nodes, np.full(resolution, area / resolution), "fibonacci"
    nodes = substream(seed, 4).standard_normal((resolution, dim))
    nodes /= np.linalg.norm(nodes, axis=-1, keepdims=True)
    return nodes, np.full(resolution, area / resolution), "monte-carlo"


def direction_quadrature(
    model: MetricModel,
    p,
    resolution: Optional[int] = None,
    seed: int = 0,
) -> DirectionQuadrature:
    """Indicatrix nodes y_a = u_a / F(p, u_a) with weights w_a = w_E sigma(p) / F(p, u_a)^d.

    sigma(p) |det[y, dy(e_1), ..., dy(e_{d-1})]| = sigma(p) / F^d is the dA_p density
    of the radial parametrization, so the weights sum to |S^{d-1}| for every model.
    """
    p = model.require_point(p)
    d = model.dim
    resolution = default_resolution(d) if resolution is None else int(resolution)
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    units, base_weights, scheme = euclidean_sphere_nodes(d, resolution, seed)
    lengths = model.norm(np.broadcast_to(p, units.shape), units)
    sigma = float(density_values(model, p[None, :])[0])
    weights = base_weights * sigma / lengths**d
    stderr = None
    if scheme == "monte-carlo":
        stderr = float(np.std(weights, ddof=1) * resolution / np.sqrt(resolution))
    quad = DirectionQuadrature(
        p=p,
        nodes=units / lengths[:, None],
        weights=weights,
        resolution=resolution,
        seed=seed,
        scheme=scheme,
        stderr=stderr,
    )
    expected = unit_sphere_area(d - 1)
    drift = abs(quad.total_weight - expected) / expected
    if drift > 1e-2:
        logger.warning(f"Direction quadrature total {quad.total_weight:.6g} is {drift:.2%} off |S^{d - 1}|")
    logger.debug(f"Built {scheme} direction quadrature with {resolution} nodes at p={p}")
    return quad
