from dotenv import load_dotenv

load_dotenv()
import sys

sys.path.append(".")

import numpy as np
import pytest

from src.metric.bodies import ConvexBody, forward_boundary_parameter, ray_boundary_parameter
from src.metric.models import hilbert_norm, make_model
from src.metric.norms import (
    eval_norm,
    fundamental_tensor,
    indicatrix_volume,
    norm_gradient,
    sigma_density,
    strong_convexity_report,
)
from src.utils.errors import PointOutsideDomain, ZeroVector

FUNK = {"kind": "funk", "dim": 2}
ELLIPSE_FUNK = {"kind": "funk", "dim": 2, "body": {"kind": "ellipsoid", "semi_axes": [2.0, 1.0], "center": [0.1, -0.2]}}


def test_zero_vector_has_zero_norm():
    model = make_model(FUNK)
    assert eval_norm(model, [0.1, 0.2], [0.0, 0.0]) == 0.0


def test_funk_norm_reaches_boundary():
    model = make_model(FUNK)
    assert eval_norm(model, [0.5, 0.0], [1.0, 0.0]) == pytest.approx(2.0, rel=1e-12)
    assert eval_norm(model, [0.5, 0.0], [-1.0, 0.0]) == pytest.approx(2.0 / 3.0, rel=1e-12)
    assert eval_norm(model, [0.0, 0.0], [0.3, 0.4]) == pytest.approx(0.5, rel=1e-12)


def test_funk_norm_on_stack():
    model = make_model(FUNK)
    values = eval_norm(model, [0.5, 0.0], np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 0.0]]))
    np.testing.assert_allclose(values, [2.0, 2.0 / 3.0, 0.0], rtol=1e-12)


def test_hilbert_is_reversible_klein_norm():
    model = make_model({"kind": "hilbert", "dim": 2})
    x, y = [0.5, 0.0], [1.0, 0.0]
    assert eval_norm(model, x, y) == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert eval_norm(model, x, [-1.0, 0.0]) == pytest.approx(eval_norm(model, x, y), rel=1e-12)


def test_hilbert_norm_examples():
    body = make_model({"kind": "hilbert", "dim": 2}).body
    assert hilbert_norm(body, [0.5, 0.0], [1.0, 0.0]) == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert hilbert_norm(body, [0.0, 0.0], [0.6, 0.8]) == pytest.approx(1.0, rel=1e-12)


def test_hilbert_norm_is_exactly_reversible_and_drives_the_model():
    model = make_model({"kind": "hilbert", "dim": 2, "body": {"kind": "ellipsoid", "semi_axes": [1.5, 1.0], "center": [0.2, 0.0]}})
    rng = np.random.default_rng(17)
    for _ in range(20):
        x = model.body.center + rng.uniform(-0.4, 0.4, 2)
        y = rng.standard_normal(2)
        value = hilbert_norm(model.body, x, y)
        assert hilbert_norm(model.body, x, -y) == value
        assert eval_norm(model, x, y) == pytest.approx(value, rel=1e-14)


@pytest.mark.parametrize("config", [
    {"kind": "euclidean", "dim": 2},
    {"kind": "hyperbolic", "dim": 2, "k": 0.7},
    ELLIPSE_FUNK,
    {"kind": "hilbert", "dim": 3},
])
def test_norm_is_subadditive(config):
    model = make_model(config)
    rng = np.random.default_rng(23)
    x = np.full(model.dim, 0.1)
    U = rng.standard_normal((100, model.dim))
    V = rng.standard_normal((100, model.dim))
    assert np.all(model.norm(x, U + V) <= model.norm(x, U) + model.norm(x, V) + 1e-10)


def test_funk_indicatrix_is_the_translated_body():
    model = make_model(ELLIPSE_FUNK)
    rng = np.random.default_rng(29)
    for x in ([0.1, -0.2], [0.9, 0.1], [-1.2, -0.5]):
        x = np.asarray(x)
        Y = rng.uniform(-3.5, 3.5, (1000, 2))
        gauge = model.body.gauge(x + Y)
        clear = np.abs(gauge - 1.0) > 1e-9
        np.testing.assert_array_equal((model.norm(x, Y) < 1.0)[clear], (gauge < 1.0)[clear])


def test_hyperbolic_norm_is_conformal():
    model = make_model({"kind": "hyperbolic", "dim": 3, "k": 2.0})
    x = np.array([0.3, -0.1, 0.2])
    y = np.array([1.0, 2.0, -0.5])
    expected = 2.0 / (2.0 * (1.0 - x @ x)) * np.linalg.norm(y)
    assert eval_norm(model, x, y) == pytest.approx(expected, rel=1e-12)


def test_fundamental_tensor_identity_and_homogeneity():
    model = make_model(ELLIPSE_FUNK)
    x = np.array([0.3, 0.1])
    y = np.array([0.7, -0.4])
    data = fundamental_tensor(model, x, y)
    assert data.min_eigenvalue > 0
    assert abs(y @ data.g @ y - data.F**2) <= 1e-8 * data.F**2
    scaled = fundamental_tensor(model, x, 3.0 * y)
    np.testing.assert_allclose(scaled.g, data.g, atol=1e-6 * np.abs(data.g).max())


def test_fundamental_tensor_rejects_zero_vector():
    model = make_model(FUNK)
    with pytest.raises(ZeroVector):
        fundamental_tensor(model, [0.1, 0.1], [0.0, 0.0])


def test_point_outside_body_is_rejected():
    model = make_model(FUNK)
    with pytest.raises(PointOutsideDomain):
        fundamental_tensor(model, [1.2, 0.0], [1.0, 0.0])


def test_ray_cast_methods_agree():
    body = ConvexBody.ellipsoid([2.0, 1.0], center=[0.1, -0.2])
    x = np.array([0.3, 0.1])
    for y in ([1.0, 0.0], [-0.3, 0.8], [0.5, -2.0]):
        closed = ray_boundary_parameter(body, x, y)
        iterative = ray_boundary_parameter(body, x, y, method="iterative")
        assert iterative == pytest.approx(closed, rel=1e-10)
        assert float(body.gauge(x + closed * np.asarray(y))) == pytest.approx(1.0, abs=1e-12)
    batched = forward_boundary_parameter(body, np.tile(x, (2, 1)), np.array([[1.0, 0.0], [-0.3, 0.8]]))
    assert batched.shape == (2,)


def test_indicatrix_volume_of_euclidean_balls():
    plane = make_model({"kind": "euclidean", "dim": 2})
    space = make_model({"kind": "euclidean", "dim": 3})
    assert indicatrix_volume(plane, [0.0, 0.0], seed=3) == pytest.approx(np.pi, rel=5e-3)
    assert indicatrix_volume(space, [0.0, 0.0, 0.0], seed=3) == pytest.approx(4.0 * np.pi / 3.0, rel=5e-3)


def test_indicatrix_volume_needs_enough_samples():
    model = make_model(FUNK)
    with pytest.raises(ValueError):
        indicatrix_volume(model, [0.0, 0.0], samples=10)


def test_indicatrix_volume_is_basis_independent():
    model = make_model(ELLIPSE_FUNK)
    x = [0.3, 0.1]
    skew = np.array([[1.0, 0.3], [0.2, 0.9]])
    assert indicatrix_volume(model, x, basis=skew) == pytest.approx(indicatrix_volume(model, x), rel=1e-2)


def test_sigma_hooks_match_containment():
    hyperbolic = make_model({"kind": "hyperbolic", "dim": 2})
    x = [0.3, 0.2]
    assert sigma_density(hyperbolic, x, method="containment") == pytest.approx(sigma_density(hyperbolic, x), rel=1e-2)
    funk = make_model(FUNK)
    # the Funk indicatrix at x is the body shifted by -x
    assert sigma_density(funk, [0.5, 0.0], method="containment") == pytest.approx(1.0, rel=1e-2)


def test_hilbert_density_is_riemannian_volume():
    model = make_model({"kind": "hilbert", "dim": 2})
    x = np.array([0.4, -0.3])
    assert sigma_density(model, x, method="riemannian") == pytest.approx((1.0 - x @ x) ** -1.5, rel=1e-10)
    assert sigma_density(model, x) == pytest.approx((1.0 - x @ x) ** -1.5, rel=1e-10)


def test_norm_gradient_satisfies_euler_identity():
    model = make_model(ELLIPSE_FUNK)
    X = np.array([[0.3, 0.1], [0.0, -0.5]])
    Y = np.array([[0.7, -0.4], [-1.0, 0.2]])
    grad = norm_gradient(model, X, Y)
    np.testing.assert_allclose(np.sum(grad * Y, axis=1), model.norm(X, Y), rtol=1e-8)


def test_strong_convexity_report_is_positive():
    model = make_model(ELLIPSE_FUNK)
    assert strong_convexity_report(model, [0.3, 0.1], num_dirs=16, seed=1) > 0
