from dataclasses import dataclass, field
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class BodyConfig(BaseModel):
    """Convex body backing a Funk or Hilbert metric."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["unit-ball", "ellipsoid"] = "unit-ball"
    semi_axes: Optional[List[float]] = None
    center: Optional[List[float]] = None
    # full SPD shape matrix A of {(z - c)^T A (z - c) < 1}; overrides semi_axes
    shape: Optional[List[List[float]]] = None

    @field_validator("semi_axes")
    @classmethod
    def _positive_axes(cls, value):
        if value is not None and any(not np.isfinite(a) or a <= 0 for a in value):
            raise ValueError("semi-axes must be finite and positive")
        return value

    @field_validator("center")
    @classmethod
    def _finite_center(cls, value):
        if value is not None and not np.all(np.isfinite(value)):
            raise ValueError("center must be finite")
        return value

    @field_validator("shape")
    @classmethod
    def _spd_shape(cls, value):
        if value is None:
            return value
        matrix = np.asarray(value, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("shape must be a square matrix")
        if not np.allclose(matrix, matrix.T, atol=1e-12):
            raise ValueError("shape must be symmetric")
        if np.linalg.eigvalsh(matrix).min() <= 0:
            raise ValueError("shape must be positive definite")
        return value


class ModelConfig(BaseModel):
    """JSON model description: {"kind", "dim", "k"?, "body"?}."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["euclidean", "hyperbolic", "funk", "hilbert"]
    dim: int = Field(2, ge=2)
    k: Optional[float] = Field(None, gt=0)
    body: Optional[BodyConfig] = None

    @model_validator(mode="after")
    def _fill_defaults(self):
        if self.kind == "hyperbolic" and self.k is None:
            self.k = 1.0
        if self.kind in ("funk", "hilbert"):
            if self.body is None:
                self.body = BodyConfig()
            body = self.body
            if body.kind == "ellipsoid" and body.semi_axes is None and body.shape is None:
                raise ValueError("ellipsoid body needs semi_axes or shape")
            for name in ("semi_axes", "center", "shape"):
                value = getattr(body, name)
                if value is not None and len(value) != self.dim:
                    raise ValueError(f"body.{name} must have {self.dim} entries")
        elif self.body is not None:
            raise ValueError(f"{self.kind} model takes no body")
        return self


@dataclass(frozen=True)
class ModelFacts:
    """Known constants of a catalog model.

    ``expected_s_coefficient`` is the delta of S = (d - 1) * delta * F,
    ``expected_s_curvature`` the ratio S / F itself.
    """

    expected_flag_curvature: Optional[float] = None
    expected_s_coefficient: Optional[float] = None
    expected_s_curvature: Optional[float] = None
    k1: Optional[float] = None
    k2: Optional[float] = None
    delta1: Optional[float] = None
    delta2: Optional[float] = None
    is_riemannian: bool = False
    geodesics_are_lines: bool = False

    @property
    def has_bounds(self) -> bool:
        return None not in (self.k1, self.k2, self.delta1, self.delta2)

    @property
    def admissible(self) -> bool:
        return self.has_bounds and self.delta1 < self.k1 and self.delta2 < self.k2

    def to_dict(self) -> dict:
        return {
            "expected_flag_curvature": self.expected_flag_curvature,
            "expected_s_coefficient": self.expected_s_coefficient,
            "expected_s_curvature": self.expected_s_curvature,
            "k1": self.k1,
            "k2": self.k2,
            "delta1": self.delta1,
            "delta2": self.delta2,
            "is_riemannian": self.is_riemannian,
            "geodesics_are_lines": self.geodesics_are_lines,
            "admissible": self.admissible,
        }


@dataclass
class MinkowskiData:
    F: float
    g: np.ndarray = field(repr=False)

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.g).min())
