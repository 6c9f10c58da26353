"""Classical 4th-order Runge-Kutta with step-doubling error control."""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from ..utils.errors import StepLimitExceeded
from .views import StepControl

logger = logging.getLogger(__name__)

# local error of two half steps versus one full step: |z2 - z1| / (2^4 - 1)
_DOUBLING_FACTOR = 15.0
_MIN_STEP = 1e-13


@dataclass
class Trajectory:
    times: List[float]
    states: List[np.ndarray]
    accepted: int = 0
    rejected: int = 0
    truncated: bool = False


def rk4_step(rhs: Callable, t: float, z: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(t, z)
    k2 = rhs(t + h / 2, z + h * k1 / 2)
    k3 = rhs(t + h / 2, z + h * k2 / 2)
    k4 = rhs(t + h, z + h * k3)
    return z + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6


def integrate(
    rhs: Callable,
    z0: np.ndarray,
    T: float,
    ctrl: StepControl,
    inside: Optional[Callable[[np.ndarray], bool]] = None,
) -> Trajectory:
    """Integrate z' = rhs(t, z) on [0, T].

    ``inside(z)`` marks admissible states; the trajectory is truncated at the
    last admissible state when it would leave.
    """
    z = np.asarray(z0, dtype=float)
    traj = Trajectory(times=[0.0], states=[z.copy()])
    if T == 0:
        return traj
    inside = inside or (lambda state: True)

    if not ctrl.adaptive:
        count = max(1, int(np.ceil(T / ctrl.initial_step - 1e-12)))
        h = T / count
        for i in range(count):
            z_next = rk4_step(rhs, i * h, z, h)
            if not np.all(np.isfinite(z_next)) or not inside(z_next):
                traj.truncated = True
                break
            z = z_next
            traj.times.append((i + 1) * h)
            traj.states.append(z.copy())
            traj.accepted += 1
        return traj

    t = 0.0
    h = min(ctrl.initial_step, ctrl.max_step, T)
    while t < T:
        if traj.accepted + traj.rejected >= ctrl.max_steps:
            raise StepLimitExceeded(
                f"geodesic integration used {ctrl.max_steps} steps and stopped at t={t:.6g} of {T:.6g}"
            )
        last = t + h >= T
        if last:
            h = T - t
        full = rk4_step(rhs, t, z, h)
        half = rk4_step(rhs, t, z, h / 2)
        double = rk4_step(rhs, t + h / 2, half, h / 2)
        error = float(np.max(np.abs(double - full))) / _DOUBLING_FACTOR
        if not np.isfinite(error) or not np.all(np.isfinite(double)):
            # a stage left the domain of the vector field
            error = np.inf
        scale = max(1.0, float(np.max(np.abs(z))))
        if error <= ctrl.error_tol * scale:
            if not inside(double):
                traj.truncated = True
                break
            t = T if last else t + h
            z = double
            traj.times.append(t)
            traj.states.append(z.copy())
            traj.accepted += 1
            growth = 4.0 if error == 0 else min(4.0, 0.9 * (ctrl.error_tol * scale / error) ** 0.2)
            h = min(ctrl.max_step, max(h * growth, h))
        else:
            traj.rejected += 1
            shrink = 0.25 if not np.isfinite(error) else max(0.1, 0.9 * (ctrl.error_tol * scale / error) ** 0.2)
            h *= shrink
            if h < _MIN_STEP:
                # the field blows up ahead: domain boundary reached
                traj.truncated = True
                break
    logger.debug(f"RK4 accepted {traj.accepted} steps, rejected {traj.rejected}")
    return traj
