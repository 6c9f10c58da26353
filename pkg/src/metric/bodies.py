import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..utils.errors import NoConvergence, PointOutsideDomain, ZeroVector
from .views import BodyConfig

logger = logging.getLogger(__name__)

EPSILON_ZERO = 1e-9


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """Open ellipsoid {z : (z - c)^T A (z - c) < 1}.

    The unit ball is the case c = 0, A = I. Every body here is smooth and
    strongly convex by construction.
    """

    center: np.ndarray
    shape: np.ndarray
    kind: str = "ellipsoid"
    margin: float = 1e-6
    _lipschitz: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        shape = np.asarray(self.shape, dtype=float)
        if shape.shape != (center.size, center.size):
            raise ValueError("shape matrix does not match the center dimension")
        eigenvalues = np.linalg.eigvalsh(shape)
        if eigenvalues.min() <= 0:
            raise ValueError("shape matrix must be positive definite")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "shape", shape)
        # gauge(z + dz) <= gauge(z) + _lipschitz * |dz|
        object.__setattr__(self, "_lipschitz", float(np.sqrt(eigenvalues.max())))

    @classmethod
    def unit_ball(cls, dim: int, margin: float = 1e-6) -> "ConvexBody":
        return cls(center=np.zeros(dim), shape=np.eye(dim), kind="unit-ball", margin=margin)

    @classmethod
    def ellipsoid(cls, semi_axes, center=None, margin: float = 1e-6) -> "ConvexBody":
        semi_axes = np.asarray(semi_axes, dtype=float)
        center = np.zeros(semi_axes.size) if center is None else np.asarray(center, dtype=float)
        return cls(center=center, shape=np.diag(1.0 / semi_axes**2), kind="ellipsoid", margin=margin)

    @classmethod
    def from_config(cls, config: BodyConfig, dim: int, margin: float = 1e-6) -> "ConvexBody":
        center = np.zeros(dim) if config.center is None else np.asarray(config.center, dtype=float)
        if config.shape is not None:
            return cls(center=center, shape=np.asarray(config.shape, dtype=float), kind=config.kind, margin=margin)
        if config.kind == "unit-ball" and config.semi_axes is None:
            return cls(center=center, shape=np.eye(dim), kind="unit-ball", margin=margin)
        return cls.ellipsoid(config.semi_axes, center=center, margin=margin)

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def lipschitz(self) -> float:
        return self._lipschitz

    @property
    def volume_factor(self) -> float:
        """Vol_E(body) / Vol_E(unit ball) = 1 / sqrt(det A)."""
        return float(1.0 / np.sqrt(np.linalg.det(self.shape)))

    def quadratic(self, z) -> np.ndarray:
        w = np.asarray(z, dtype=float) - self.center
        return np.einsum("...i,ij,...j->...", w, self.shape, w)

    def gauge(self, z) -> np.ndarray:
        """Minkowski functional about the center: < 1 inside, = 1 on the boundary."""
        return np.sqrt(self.quadratic(z))

    def is_interior(self, z, margin: Optional[float] = None) -> np.ndarray:
        margin = self.margin if margin is None else margin
        return self.gauge(z) < 1.0 - margin

    def require_interior(self, z, margin: Optional[float] = None):
        z = np.asarray(z, dtype=float)
        if not np.all(np.isfinite(z)):
            raise PointOutsideDomain("point has non-finite coordinates")
        inside = self.is_interior(z, margin)
        if not np.all(inside):
            worst = float(np.max(self.gauge(z)))
            margin = self.margin if margin is None else margin
            raise PointOutsideDomain(f"point with gauge {worst:.12g} is not inside the body (margin {margin:g})")

    def clearance(self, z) -> np.ndarray:
        """Lower bound on the Euclidean distance from z to the boundary."""
        return (1.0 - self.gauge(z)) / self._lipschitz

    def ray_coefficients(self, x, y):
        """(a, b, q) with gauge(x + s y)^2 = a s^2 + 2 b s + q."""
        w = np.asarray(x, dtype=float) - self.center
        y = np.asarray(y, dtype=float)
        ay = np.einsum("ij,...j->...i", self.shape, y)
        a = np.einsum("...i,...i->...", y, ay)
        b = np.einsum("...i,...i->...", w, ay)
        q = np.einsum("...i,ij,...j->...", w, self.shape, w)
        return a, b, q


def forward_boundary_parameter(body: ConvexBody, x, y) -> np.ndarray:
    """Closed-form s* > 0 of x + s* y on the boundary, batched over x and y.

    No interiority check; the caller is responsible for 1 - q > 0.
    """
    a, b, q = body.ray_coefficients(x, y)
    gap = 1.0 - q
    root = np.sqrt(b * b + a * gap)
    with np.errstate(divide="ignore", invalid="ignore"):
        # both branches are the same root written without cancellation
        return np.where(b >= 0, gap / (b + root), (root - b) / a)


def ray_boundary_parameter(
    body: ConvexBody,
    x,
    y,
    method: str = "auto",
    tol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Parameter s* > 0 with x + s* y on the boundary of the body."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    body.require_interior(x)
    if np.linalg.norm(y) < EPSILON_ZERO:
        raise ZeroVector("ray direction must be nonzero")

    if method == "auto":
        return float(forward_boundary_parameter(body, x, y))
    if method != "iterative":
        raise ValueError(f"unknown ray-cast method: {method}")

    def residual(s):
        return float(body.gauge(x + s * y)) - 1.0

    def slope(s):
        z = x + s * y
        return float((z - body.center) @ body.shape @ y) / max(float(body.gauge(z)), 1e-300)

    lo, hi = 0.0, 1.0 / float(np.linalg.norm(y))
    expansions = 0
    while residual(hi) <= 0.0:
        lo, hi = hi, 2.0 * hi
        expansions += 1
        if expansions > max_iter:
            raise NoConvergence(f"could not bracket the boundary along the ray after {max_iter} expansions")

    s = 0.5 * (lo + hi)
    for iteration in range(max_iter):
        value = residual(s)
        if abs(value) <= tol:
            logger.debug(f"Ray cast converged in {iteration} iterations")
            return s
        if value < 0:
            lo = s
        else:
            hi = s
        derivative = slope(s)
        candidate = s - value / derivative if derivative > 0 else np.nan
        # Newton inside the bracket, bisection otherwise
        s = candidate if lo < candidate < hi else 0.5 * (lo + hi)
        if hi - lo <= np.finfo(float).eps * hi:
            break
    value = residual(s)
    if abs(value) <= tol:
        return s
    raise NoConvergence(f"ray cast stopped at |gauge - 1| = {abs(value):.3e} after {max_iter} iterations")
