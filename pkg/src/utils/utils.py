import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np
from scipy.special import gammaln

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    """Worker cap for node-parallel work (FINSLER_THREADS, default: cpu count)."""
    raw = os.getenv("FINSLER_THREADS", "")
    if raw.strip():
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning(f"Ignoring non-integer FINSLER_THREADS={raw!r}")
    return os.cpu_count() or 1


def parallel_map(func: Callable[[T], R], items: Iterable[T], max_workers: Optional[int] = None) -> List[R]:
    """Map ``func`` over ``items`` concurrently; results keep input order."""
    items = list(items)
    workers = min(max_workers or thread_count(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def substream(seed: int, *counters: int) -> np.random.Generator:
    """Independent generator for (seed, counters); identical in serial and parallel runs."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(c) for c in counters)))


def unit_ball_volume(dim: int) -> float:
    """Euclidean volume of the unit ball in R^dim (dim >= 0)."""
    return math.exp((dim / 2.0) * math.log(math.pi) - gammaln(dim / 2.0 + 1.0))


def unit_sphere_area(dim: int) -> float:
    """Euclidean area of the unit sphere S^dim sitting in R^(dim+1)."""
    return (dim + 1) * unit_ball_volume(dim + 1)


def orthonormal_complement(vector) -> np.ndarray:
    """Rows spanning the Euclidean orthogonal complement of ``vector``.

    Works on a single vector ``(d,)`` or a stack ``(m, d)``; returns ``(d-1, d)``
    or ``(m, d-1, d)``.
    """
    vector = np.asarray(vector, dtype=float)
    single = vector.ndim == 1
    stack = vector[None, :] if single else vector
    _, _, vh = np.linalg.svd(stack[:, None, :])
    basis = vh[:, 1:, :]
    return basis[0] if single else basis


def rotation_matrix(dim: int, seed: int) -> np.ndarray:
    """Deterministic random rotation (QR of a Gaussian matrix, det = +1)."""
    rng = substream(seed, 7)
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
