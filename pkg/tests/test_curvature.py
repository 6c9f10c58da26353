from dotenv import load_dotenv

load_dotenv()
import sys

sys.path.append(".")

import numpy as np
import pytest

from src.curvature.curvature import (
    FlagInput,
    distortion,
    distortion_rate,
    flag_curvature,
    riemann_curvature,
    ricci,
    s_curvature,
)
from src.metric.models import make_model
from src.utils.errors import DegenerateFlag, NumericalNoise


def _unit(model, x, y):
    y = np.asarray(y, dtype=float)
    return y / float(model.norm(x, y))


def test_hyperbolic_flag_curvature():
    model = make_model({"kind": "hyperbolic", "dim": 2})
    flag = FlagInput(x=[0.2, 0.1], y=[1.0, 0.3], u=[-0.2, 1.0])
    assert flag_curvature(flag, model) == pytest.approx(-1.0, abs=1e-3)


def test_scaled_hyperbolic_flag_curvature_in_three_dimensions():
    model = make_model({"kind": "hyperbolic", "dim": 3, "k": 2.0})
    flag = FlagInput(x=[0.1, -0.2, 0.15], y=[0.5, 0.2, -0.1], u=[0.0, 0.3, 1.0])
    assert flag_curvature(flag, model) == pytest.approx(-4.0, abs=4e-3)


def test_funk_flag_curvature_is_minus_a_quarter():
    model = make_model({"kind": "funk", "dim": 2})
    flag = FlagInput(x=[0.3, -0.2], y=[0.4, 0.5], u=[1.0, 0.0])
    assert flag_curvature(flag, model) == pytest.approx(-0.25, abs=1e-3)


def test_hilbert_flag_curvature_is_minus_one():
    model = make_model({"kind": "hilbert", "dim": 2, "body": {"kind": "ellipsoid", "semi_axes": [1.5, 1.0]}})
    flag = FlagInput(x=[0.2, 0.1], y=[0.3, -0.6], u=[1.0, 0.4])
    assert flag_curvature(flag, model) == pytest.approx(-1.0, abs=1e-2)


def test_euclidean_curvature_vanishes():
    model = make_model({"kind": "euclidean", "dim": 3})
    R = riemann_curvature(model, [0.5, 1.0, -2.0], [1.0, 0.0, 1.0])
    assert np.abs(R).max() <= 1e-10
    assert ricci(model, [0.5, 1.0, -2.0], [1.0, 0.0, 1.0]) == pytest.approx(0.0, abs=1e-10)


def test_flag_curvature_depends_only_on_the_plane():
    model = make_model({"kind": "funk", "dim": 2})
    x, y, u = np.array([0.3, -0.2]), np.array([0.4, 0.5]), np.array([1.0, 0.0])
    R = riemann_curvature(model, x, y)
    first = flag_curvature(FlagInput(x, y, u), model, riemann=R)
    second = flag_curvature(FlagInput(x, y, 2.0 * u - 3.0 * y), model, riemann=R)
    assert second == pytest.approx(first, abs=1e-6)


def test_parallel_edge_is_degenerate():
    model = make_model({"kind": "hyperbolic", "dim": 2})
    with pytest.raises(DegenerateFlag):
        flag_curvature(FlagInput(x=[0.1, 0.1], y=[1.0, 2.0], u=[2.0, 4.0]), model)


def test_flagpole_is_in_the_kernel():
    model = make_model({"kind": "funk", "dim": 3})
    x, y = np.array([0.1, 0.2, -0.3]), np.array([0.5, -0.1, 0.4])
    R = riemann_curvature(model, x, y)
    assert np.abs(R @ y).max() <= 1e-4


def test_funk_ricci_is_constant():
    model = make_model({"kind": "funk", "dim": 3})
    x = np.array([0.1, 0.2, -0.3])
    y = _unit(model, x, [0.5, -0.1, 0.4])
    # Ric = (d - 1) K F^2 with K = -1/4
    assert ricci(model, x, y) == pytest.approx(-0.5, abs=2e-3)


@pytest.mark.parametrize("dim", [2, 3])
def test_funk_s_curvature(dim):
    model = make_model({"kind": "funk", "dim": dim})
    x = np.full(dim, 0.15)
    y = np.linspace(0.3, -0.4, dim)
    expected = (dim + 1) / 2.0 * float(model.norm(x, y))
    assert s_curvature(model, x, y, cross_check=True) == pytest.approx(expected, abs=1e-3)


def test_s_curvature_cross_checks_the_distortion_rate_by_default(monkeypatch):
    model = make_model({"kind": "funk", "dim": 2})
    x = np.array([0.15, 0.15])
    y = np.array([0.3, -0.4])
    monkeypatch.setattr("src.curvature.curvature.distortion_rate", lambda *args, **kwargs: 0.0)
    with pytest.raises(NumericalNoise):
        s_curvature(model, x, y)
    assert s_curvature(model, x, y, cross_check=False) == pytest.approx(1.5 * float(model.norm(x, y)), abs=1e-3)


def test_riemannian_models_have_no_s_curvature():
    for config in ({"kind": "hyperbolic", "dim": 2}, {"kind": "hilbert", "dim": 2}, {"kind": "euclidean", "dim": 2}):
        model = make_model(config)
        assert s_curvature(model, [0.2, -0.3], [0.7, 0.4]) == pytest.approx(0.0, abs=1e-3)


def test_distortion_vanishes_for_riemannian_models():
    model = make_model({"kind": "hyperbolic", "dim": 2})
    assert distortion(model, [0.3, 0.1], [1.0, 0.5]) == pytest.approx(0.0, abs=1e-10)


def test_funk_distortion_rate_is_s_curvature():
    model = make_model({"kind": "funk", "dim": 2})
    x = np.array([0.2, 0.1])
    y = _unit(model, x, [0.3, -0.5])
    assert distortion_rate(model, x, y) == pytest.approx(1.5, abs=1e-3)
