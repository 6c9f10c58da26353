"""Catalog of metric models.

Every model carries a batched norm ``norm_fn(X, Y)`` on stacks of shape
``(m, d)``; the catalog models also register closed-form hooks (tensor, spray,
density, unit-speed geodesics, distance) that override the numerical paths.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from pydantic import ValidationError

from ..comparison.views import BoundParams
from ..utils.default_config_settings import validation_errors
from ..utils.errors import InadmissibleModel, InvalidConfig, PointOutsideDomain, ZeroVector
from ..utils.utils import substream
from .bodies import EPSILON_ZERO, ConvexBody, forward_boundary_parameter
from .views import ModelConfig, ModelFacts

logger = logging.getLogger(__name__)

BatchedNorm = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class MetricModel:
    kind: str
    dim: int
    norm_fn: BatchedNorm
    facts: ModelFacts
    body: Optional[ConvexBody] = None
    k: Optional[float] = None
    margin: float = 1e-6
    tensor_fn: Optional[Callable] = None
    spray_fn: Optional[Callable] = None
    density_fn: Optional[Callable] = None
    geodesic_fn: Optional[Callable] = None
    distance_fn: Optional[Callable] = None
    config: Optional[ModelConfig] = None
    name: str = ""

    @property
    def model_id(self) -> str:
        return self.name or f"{self.kind}-d{self.dim}"

    @property
    def has_domain(self) -> bool:
        return self.body is not None or self.kind == "hyperbolic"

    def gauge(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.body is not None:
            return self.body.gauge(x)
        if self.kind == "hyperbolic":
            return np.linalg.norm(x, axis=-1)
        return np.zeros(x.shape[:-1])

    def is_interior(self, x, margin: Optional[float] = None) -> np.ndarray:
        margin = self.margin if margin is None else margin
        if not self.has_domain:
            return np.all(np.isfinite(x), axis=-1)
        return self.gauge(x) < 1.0 - margin

    def require_point(self, x, margin: Optional[float] = None) -> np.ndarray:
        """Validated chart point(s); raises PointOutsideDomain."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise PointOutsideDomain(f"point has {x.shape[-1]} coordinates, model dimension is {self.dim}")
        if not np.all(np.isfinite(x)):
            raise PointOutsideDomain("point has non-finite coordinates")
        if not np.all(self.is_interior(x, margin)):
            margin = self.margin if margin is None else margin
            worst = float(np.max(self.gauge(x)))
            raise PointOutsideDomain(
                f"point with gauge {worst:.12g} violates the {self.model_id} domain (margin {margin:g})"
            )
        return x

    def clearance(self, x) -> float:
        """Euclidean distance from x that keeps every stencil point inside the domain."""
        if self.body is not None:
            return float(self.body.clearance(x))
        if self.kind == "hyperbolic":
            return float(1.0 - np.linalg.norm(x))
        return np.inf

    def norm(self, x, y) -> np.ndarray:
        """Raw batched norm; no domain checks."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        flat_x = x.reshape(-1, self.dim)
        flat_y = y.reshape(-1, self.dim)
        return np.asarray(self.norm_fn(flat_x, flat_y), dtype=float).reshape(x.shape[:-1])


def require_vector(y, epsilon_zero: float = EPSILON_ZERO) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ZeroVector("vector has non-finite components")
    if np.any(np.linalg.norm(y, axis=-1) < epsilon_zero):
        raise ZeroVector(f"vector shorter than epsilon_zero={epsilon_zero:g}")
    return y


# ---- Euclidean ----------------------------------------------------------------


def _euclidean_hooks(dim: int) -> dict:
    def norm(X, Y):
        return np.linalg.norm(Y, axis=-1)

    def tensor(X, Y):
        return np.broadcast_to(np.eye(dim), Y.shape[:-1] + (dim, dim)).copy()

    def spray(X, Y):
        return np.zeros_like(Y)

    def density(X):
        return np.ones(np.asarray(X).shape[:-1])

    def geodesic(P, Y, t):
        return P + t * Y, np.array(Y, dtype=float)

    def distance(p, X):
        return np.linalg.norm(np.asarray(X) - p, axis=-1)

    return dict(norm_fn=norm, tensor_fn=tensor, spray_fn=spray, density_fn=density, geodesic_fn=geodesic, distance_fn=distance)


# ---- Poincare ball with conformal factor 2 / (k (1 - |x|^2)) -------------------


def _hyperbolic_hooks(dim: int, k: float) -> dict:
    def factor(X):
        return 2.0 / (k * (1.0 - np.einsum("...i,...i->...", X, X)))

    def norm(X, Y):
        return factor(X) * np.linalg.norm(Y, axis=-1)

    def tensor(X, Y):
        lam = factor(X)
        return (lam**2)[..., None, None] * np.eye(dim)

    def spray(X, Y):
        grad_phi = 2.0 * X / (1.0 - np.einsum("...i,...i->...", X, X))[..., None]
        along = np.einsum("...i,...i->...", grad_phi, Y)
        speed2 = np.einsum("...i,...i->...", Y, Y)
        return along[..., None] * Y - 0.5 * speed2[..., None] * grad_phi

    def density(X):
        return factor(np.asarray(X, dtype=float)) ** dim

    def geodesic(P, Y, t):
        # exp_p(t y) = p (+) tanh(k t / 2) y / |y|  (Mobius addition), F(p, y) = 1
        P = np.asarray(P, dtype=float)
        Y = np.asarray(Y, dtype=float)
        U = Y / np.linalg.norm(Y, axis=-1, keepdims=True)
        tau = np.tanh(0.5 * k * t)
        xu = np.einsum("...i,...i->...", P, U)[..., None]
        xx = np.einsum("...i,...i->...", P, P)[..., None]
        num = (1.0 + 2.0 * tau * xu + tau**2) * P + (1.0 - xx) * tau * U
        den = 1.0 + 2.0 * tau * xu + xx * tau**2
        dnum = (2.0 * xu + 2.0 * tau) * P + (1.0 - xx) * U
        dden = 2.0 * xu + 2.0 * xx * tau
        dtau = 0.5 * k * (1.0 - tau**2)
        velocity = (dnum * den - num * dden) / den**2 * dtau
        return num / den, velocity

    def distance(p, X):
        X = np.asarray(X, dtype=float)
        gap = np.einsum("...i,...i->...", X - p, X - p)
        scale = (1.0 - np.einsum("...i,...i->...", X, X)) * (1.0 - float(p @ p))
        return np.arccosh(1.0 + 2.0 * gap / scale) / k

    return dict(norm_fn=norm, tensor_fn=tensor, spray_fn=spray, density_fn=density, geodesic_fn=geodesic, distance_fn=distance)


# ---- Funk and Hilbert metrics on an ellipsoid ---------------------------------


def funk_norm_closed_form(body: ConvexBody, X, Y) -> np.ndarray:
    """F with X + Y / F on the boundary, from the ray-cast quadratic."""
    a, b, q = body.ray_coefficients(X, Y)
    gap = 1.0 - q
    root = np.sqrt(b * b + a * gap)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.where(b >= 0, (b + root) / gap, a / (root - b))
    # the zero vector lands in the second branch only as 0/0
    return np.where(a > 0, value, 0.0)


def _funk_hooks(body: ConvexBody) -> dict:
    sqrt_det = float(np.sqrt(np.linalg.det(body.shape)))

    def norm(X, Y):
        return funk_norm_closed_form(body, X, Y)

    def spray(X, Y):
        return 0.5 * norm(X, Y)[..., None] * Y

    def density(X):
        return np.full(np.asarray(X).shape[:-1], sqrt_det)

    def geodesic(P, Y, t):
        # straight ray with |x'| decaying like e^{-t}; the boundary is reached as t -> inf
        decay = np.exp(-t)
        return P + (-np.expm1(-t)) * Y, decay * np.asarray(Y, dtype=float)

    return dict(norm_fn=norm, spray_fn=spray, density_fn=density, geodesic_fn=geodesic)


def hilbert_norm_closed_form(body: ConvexBody, X, Y) -> np.ndarray:
    """Symmetrized Funk norm 1/2 (F(x, y) + F(x, -y)), batched."""
    return 0.5 * (funk_norm_closed_form(body, X, Y) + funk_norm_closed_form(body, X, -np.asarray(Y, dtype=float)))


def hilbert_norm(body: ConvexBody, x, y) -> float:
    x = np.asarray(x, dtype=float)
    body.require_interior(x)
    y = require_vector(y)
    return float(hilbert_norm_closed_form(body, x, y))


def _hilbert_hooks(body: ConvexBody) -> dict:
    dim = body.dim
    shape = body.shape
    sqrt_det = float(np.sqrt(np.linalg.det(shape)))

    def norm(X, Y):
        return hilbert_norm_closed_form(body, X, Y)

    def tensor(X, Y):
        W = np.asarray(X, dtype=float) - body.center
        AW = W @ shape
        gap = 1.0 - np.einsum("...i,...i->...", W, AW)
        outer = np.einsum("...i,...j->...ij", AW, AW)
        return (outer + gap[..., None, None] * shape) / (gap**2)[..., None, None]

    def spray(X, Y):
        _, b, q = body.ray_coefficients(X, Y)
        return (b / (1.0 - q))[..., None] * Y

    def density(X):
        gap = 1.0 - body.quadratic(X)
        return sqrt_det * gap ** (-(dim + 1) / 2.0)

    def geodesic(P, Y, t):
        P = np.asarray(P, dtype=float)
        Y = np.asarray(Y, dtype=float)
        ahead = forward_boundary_parameter(body, P, Y)[..., None]
        behind = forward_boundary_parameter(body, P, -Y)[..., None]
        decay = np.exp(-2.0 * t)
        den = ahead * decay + behind
        s = ahead * behind * (-np.expm1(-2.0 * t)) / den
        ds = 2.0 * decay * ahead * behind * (ahead + behind) / den**2
        return P + s * Y, ds * Y

    return dict(norm_fn=norm, tensor_fn=tensor, spray_fn=spray, density_fn=density, geodesic_fn=geodesic)


# ---- construction -------------------------------------------------------------


def _facts_for(config: ModelConfig) -> ModelFacts:
    d = config.dim
    if config.kind == "euclidean":
        return ModelFacts(
            expected_flag_curvature=0.0,
            expected_s_coefficient=0.0,
            expected_s_curvature=0.0,
            is_riemannian=True,
            geodesics_are_lines=True,
        )
    if config.kind == "hyperbolic":
        k = float(config.k)
        return ModelFacts(
            expected_flag_curvature=-(k**2),
            expected_s_coefficient=0.0,
            expected_s_curvature=0.0,
            k1=k,
            k2=k,
            delta1=0.0,
            delta2=0.0,
            is_riemannian=True,
        )
    if config.kind == "funk":
        s_curvature = (d + 1) / 2.0
        delta = s_curvature / (d - 1)
        return ModelFacts(
            expected_flag_curvature=-0.25,
            expected_s_coefficient=delta,
            expected_s_curvature=s_curvature,
            k1=0.5,
            k2=0.5,
            delta1=delta,
            delta2=delta,
            geodesics_are_lines=True,
        )
    # Hilbert on an ellipsoid is the Beltrami-Klein metric
    return ModelFacts(
        expected_flag_curvature=-1.0,
        expected_s_coefficient=0.0,
        expected_s_curvature=0.0,
        k1=1.0,
        k2=1.0,
        delta1=0.0,
        delta2=0.0,
        is_riemannian=True,
        geodesics_are_lines=True,
    )


def parse_model_config(config: Union[ModelConfig, dict]) -> ModelConfig:
    if isinstance(config, ModelConfig):
        return config
    try:
        return ModelConfig.model_validate(config)
    except ValidationError as e:
        raise InvalidConfig(validation_errors(e))


def make_model(config: Union[ModelConfig, dict], margin: float = 1e-6) -> MetricModel:
    """Build a catalog model with its closed-form hooks and ModelFacts."""
    config = parse_model_config(config)
    d = config.dim
    body = None
    if config.kind == "euclidean":
        hooks = _euclidean_hooks(d)
        name = f"euclidean-d{d}"
    elif config.kind == "hyperbolic":
        hooks = _hyperbolic_hooks(d, float(config.k))
        name = f"hyperbolic-k{config.k:g}-d{d}"
    else:
        try:
            body = ConvexBody.from_config(config.body, d, margin=margin)
        except ValueError as e:
            raise InvalidConfig([("body", str(e))])
        hooks = _funk_hooks(body) if config.kind == "funk" else _hilbert_hooks(body)
        name = f"{config.kind}-{body.kind}-d{d}"

    model = MetricModel(
        kind=config.kind,
        dim=d,
        facts=_facts_for(config),
        body=body,
        k=config.k,
        margin=margin,
        config=config,
        name=name,
        **hooks,
    )
    logger.debug(f"Built model {model.model_id} with facts {model.facts}")
    return model


def make_custom_model(
    norm: Callable[[np.ndarray, np.ndarray], float],
    dim: int,
    name: str = "custom",
    facts: Optional[ModelFacts] = None,
    seed: int = 0,
    checks: int = 8,
) -> MetricModel:
    """Wrap a pointwise norm ``norm(x, y)`` defined on all of R^dim.

    Only the numerical paths are available for such models.
    """
    if dim < 2:
        raise InvalidConfig([("dim", "dimension must be at least 2")])

    def batched(X, Y):
        return np.array([float(norm(x, y)) for x, y in zip(X, Y)])

    rng = substream(seed, 11)
    for _ in range(checks):
        x = rng.standard_normal(dim) * 0.5
        y = rng.standard_normal(dim)
        scale = rng.uniform(0.1, 10.0)
        value = float(norm(x, y))
        scaled = float(norm(x, scale * y))
        if not np.isfinite(value) or value <= 0:
            raise InvalidConfig([("norm", f"norm must be positive on nonzero vectors, got {value!r}")])
        if abs(scaled - scale * value) > 1e-10 * scale * value:
            raise InvalidConfig([("norm", "norm is not positively 1-homogeneous")])

    return MetricModel(kind="custom", dim=dim, norm_fn=batched, facts=facts or ModelFacts(), name=name)


def bound_params_from_model(model: MetricModel) -> BoundParams:
    """Pinch constants from ModelFacts: k = sqrt(-K), delta = S / F / (d - 1)."""
    facts = model.facts
    if not facts.has_bounds:
        raise InadmissibleModel(
            f"{model.model_id} has no negative curvature pinch; the comparison bounds need K <= -k1^2 < 0"
        )
    return BoundParams(
        n=model.dim - 1,
        k1=facts.k1,
        k2=facts.k2,
        delta1=facts.delta1,
        delta2=facts.delta2,
    )
