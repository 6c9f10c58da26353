import json
import logging
import os
from typing import Any, Dict, Literal, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator

from .errors import InvalidConfig

logger = logging.getLogger(__name__)


class Tolerances(BaseModel):
    """Numerical tolerances; every field is also a CLI flag."""

    epsilon_zero: float = Field(1e-9, gt=0, description="vectors shorter than this are rejected")
    epsilon_boundary: float = Field(1e-6, ge=0, description="body margin in gauge units")
    tol_identity: float = Field(1e-8, gt=0, description="|y^T g y - F^2| / F^2")
    tol_pd: float = Field(1e-12, gt=0, description="minimum eigenvalue of g")
    tol_fd: float = Field(1e-8, gt=0, description="finite-difference agreement")
    tol_geo: float = Field(1e-6, gt=0, description="geodesic speed drift")
    tol_curv: float = Field(1e-3, gt=0, description="curvature agreement")
    eta_step: float = Field(1e-4, gt=0, description="direction step for Jacobi variations")
    eta_halving: float = Field(1e-3, gt=0, description="allowed relative change of eta under step halving")
    ratio_slack: float = Field(0.02, ge=0, description="relative slack of the ratio sandwich")
    volume_rtol: float = Field(1e-7, gt=0, description="relative tolerance of the co-area integral")
    density_samples: int = Field(65536, ge=1000, description="containment samples per indicatrix volume")


class RunOptions(BaseModel):
    """Options shared by the CLI subcommands."""

    seed: int = 7
    resolution: Optional[int] = Field(None, ge=8)
    r_max: float = Field(10.0, gt=0)
    steps: int = Field(20, ge=1)
    samples: int = Field(20, ge=1)
    mc_samples: int = Field(100_000, ge=10_000)
    t_window: Optional[Tuple[float, float]] = None
    point: Optional[list[float]] = None
    # "integrate" solves the spray ODE even when a closed-form geodesic exists
    geodesic_method: Literal["auto", "integrate"] = "auto"
    tolerances: Tolerances = Field(default_factory=Tolerances)

    @field_validator("t_window")
    @classmethod
    def _window_length(cls, value):
        if value is not None and value[1] - value[0] < 3.0:
            raise ValueError("window length must be at least 3")
        return value


def default_resolution(dim: int) -> int:
    """Direction-quadrature resolution per dimension."""
    if dim == 2:
        return 256
    if dim == 3:
        return 1024
    return 4096


def default_config() -> Dict[str, Any]:
    """Prepare the default run configuration"""
    return {
        "model": {"kind": "hyperbolic", "dim": 2, "k": 1.0},
        "options": RunOptions().model_dump(),
    }


def validation_errors(error: ValidationError):
    """Turn a pydantic error into (field, message) pairs."""
    pairs = []
    for item in error.errors():
        field = ".".join(str(part) for part in item.get("loc", ())) or "config"
        pairs.append((field, item.get("msg", "invalid value")))
    return pairs


def load_config_from_file(config_file: str) -> Dict[str, Any]:
    """Load a JSON configuration file."""
    try:
        with open(config_file, "r") as f:
            return json.load(f)
    except FileNotFoundError:
        raise InvalidConfig([("config", f"file not found: {config_file}")])
    except json.JSONDecodeError as e:
        raise InvalidConfig([("config", f"malformed JSON in {config_file}: {e}")])


def save_config_to_file(settings: Dict[str, Any], path: str) -> str:
    """Write a run manifest next to an output file."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    tmp_path = f"{path}.tmp"
    with open(tmp_path, "w") as f:
        json.dump(settings, f, indent=2, sort_keys=True)
        f.write("\n")
    os.replace(tmp_path, path)
    logger.info(f"Manifest saved to {path}")
    return path
