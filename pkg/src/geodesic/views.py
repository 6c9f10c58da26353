from dataclasses import dataclass, field

import numpy as np

from ..utils.errors import InvalidConfig


@dataclass(frozen=True)
class StepControl:
    initial_step: float = 0.02
    max_step: float = 0.25
    error_tol: float = 1e-11
    max_steps: int = 200_000
    # fixed steps of initial_step when False
    adaptive: bool = True

    def __post_init__(self):
        errors = [
            (name, "must be positive")
            for name in ("initial_step", "max_step", "error_tol", "max_steps")
            if not getattr(self, name) > 0
        ]
        if errors:
            raise InvalidConfig(errors)


@dataclass
class GeodesicPath:
    """Discretized geodesic with speed-drift diagnostics."""

    times: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    speed_drift: float = 0.0
    flagged: bool = False
    truncated: bool = False
    accepted_steps: int = 0
    rejected_steps: int = 0
    speeds: np.ndarray = field(default=None, repr=False)

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]

    @property
    def end_velocity(self) -> np.ndarray:
        return self.velocities[-1]

    def rows(self):
        """(t, x..., v..., F) tuples for CSV output."""
        speeds = self.speeds if self.speeds is not None else np.full(len(self.times), np.nan)
        for t, x, v, s in zip(self.times, self.points, self.velocities, speeds):
            yield (float(t), *map(float, x), *map(float, v), float(s))
