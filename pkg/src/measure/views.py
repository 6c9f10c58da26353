from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class DirectionQuadrature:
    """Nodes on the indicatrix at p with weights for its induced measure dA_p."""

    p: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    resolution: int
    seed: int
    scheme: str = "trapezoid"
    # Monte Carlo schemes only
    stderr: Optional[float] = None

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def metadata(self) -> dict:
        return {
            "scheme": self.scheme,
            "resolution": self.resolution,
            "seed": self.seed,
            "total_weight": self.total_weight,
        }


@dataclass
class AreaFrame:
    """Point of a hypersurface with its unit normal and tangent basis."""

    q: np.ndarray
    normal: np.ndarray
    tangent_basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.normal = np.asarray(self.normal, dtype=float)
        self.tangent_basis = np.atleast_2d(np.asarray(self.tangent_basis, dtype=float))

    @property
    def basis(self) -> np.ndarray:
        """Rows (normal, tangent_1, ..., tangent_{d-1})."""
        return np.vstack([self.normal, self.tangent_basis])
