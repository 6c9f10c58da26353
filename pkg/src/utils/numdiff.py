"""Central differences with one level of Richardson extrapolation.

Every routine evaluates its whole stencil in a single call, so the callables
passed in must accept a stack of arguments with shape ``(m, d)`` and return
an array whose leading axis has length ``m``.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from numpy.typing import NDArray

EPS = float(np.finfo(float).eps)

# first derivatives: cbrt(eps) balances truncation against cancellation
FIRST_ORDER_STEP = EPS ** (1.0 / 3.0)
# second derivatives divide by h**2, so the base step is larger
SECOND_ORDER_STEP = EPS ** (1.0 / 6.0)

StackedFn = Callable[[NDArray[np.float64]], NDArray[np.float64]]


def first_order_step(z) -> float:
    return FIRST_ORDER_STEP * (1.0 + float(np.linalg.norm(z)))


def second_order_step(z) -> float:
    return SECOND_ORDER_STEP * (1.0 + float(np.linalg.norm(z)))


def richardson(coarse, fine):
    """Combine central differences at steps h and h/2 (error O(h^4))."""
    return (4.0 * fine - coarse) / 3.0


def derivative(func: Callable[[float], NDArray[np.float64]], t: float, h: float):
    """d/dt func(t) for a scalar argument."""
    values = [np.asarray(func(t + s), dtype=float) for s in (h, -h, h / 2, -h / 2)]
    coarse = (values[0] - values[1]) / (2.0 * h)
    fine = (values[2] - values[3]) / h
    return richardson(coarse, fine)


def jacobian(func: StackedFn, z, h: float | None = None):
    """Return J with J[..., j] = d func / d z_j."""
    z = np.asarray(z, dtype=float)
    d = z.shape[0]
    h = first_order_step(z) if h is None else h
    eye = np.eye(d)
    points = np.concatenate(
        [z + h * eye, z - h * eye, z + 0.5 * h * eye, z - 0.5 * h * eye]
    )
    values = np.asarray(func(points), dtype=float)
    plus, minus, half_plus, half_minus = np.split(values, 4)
    coarse = (plus - minus) / (2.0 * h)
    fine = (half_plus - half_minus) / h
    return np.moveaxis(richardson(coarse, fine), 0, -1)


def hessian(func: StackedFn, z, h: float | None = None):
    """Second derivatives H[..., i, j] = d^2 func / d z_i d z_j."""
    z = np.asarray(z, dtype=float)
    d = z.shape[0]
    h = second_order_step(z) if h is None else h
    eye = np.eye(d)
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    stencil = [z]
    for step in (h, 0.5 * h):
        stencil.extend(z + step * eye)
        stencil.extend(z - step * eye)
        for i, j in pairs:
            for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                stencil.append(z + step * (si * eye[i] + sj * eye[j]))
    values = np.asarray(func(np.array(stencil)), dtype=float)
    center = values[0]
    block = 2 * d + 4 * len(pairs)
    levels = []
    for level, step in enumerate((h, 0.5 * h)):
        chunk = values[1 + level * block: 1 + (level + 1) * block]
        plus, minus = chunk[:d], chunk[d:2 * d]
        corners = chunk[2 * d:]
        out = np.zeros(center.shape + (d, d))
        for i in range(d):
            out[..., i, i] = (plus[i] - 2.0 * center + minus[i]) / step**2
        for m, (i, j) in enumerate(pairs):
            pp, pm, mp, mm = corners[4 * m: 4 * m + 4]
            value = (pp - pm - mp + mm) / (4.0 * step**2)
            out[..., i, j] = value
            out[..., j, i] = value
        levels.append(out)
    return richardson(levels[0], levels[1])


def mixed_jacobian(func: Callable, x, y, hx: float, hy: float):
    """Cross derivatives M[..., j, k] = d^2 func(x, y) / d x_j d y_k.

    ``func(X, Y)`` receives two stacks of equal length.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx, dy = x.shape[0], y.shape[0]
    ex, ey = np.eye(dx), np.eye(dy)
    xs, ys = [], []
    for scale in (1.0, 0.5):
        for j in range(dx):
            for k in range(dy):
                for sj, sk in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                    xs.append(x + sj * scale * hx * ex[j])
                    ys.append(y + sk * scale * hy * ey[k])
    values = np.asarray(func(np.array(xs), np.array(ys)), dtype=float)
    levels = []
    block = 4 * dx * dy
    for level, scale in enumerate((1.0, 0.5)):
        chunk = values[level * block:(level + 1) * block]
        out = np.zeros(chunk.shape[1:] + (dx, dy))
        for j in range(dx):
            for k in range(dy):
                m = 4 * (j * dy + k)
                pp, pm, mp, mm = chunk[m:m + 4]
                out[..., j, k] = (pp - pm - mp + mm) / (4.0 * scale**2 * hx * hy)
        levels.append(out)
    return richardson(levels[0], levels[1])
