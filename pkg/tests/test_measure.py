from dotenv import load_dotenv

load_dotenv()
import sys

sys.path.append(".")

import numpy as np
import pytest

from src.measure.area import area_density, normal_residual, normal_vector, zeta_factor
from src.measure.measure import ball_volume, ball_volume_profile, eta, eta_nodes, mean_curvature_sphere, sphere_area
from src.measure.oracle import mc_ball_volume
from src.measure.quadrature import direction_quadrature
from src.measure.views import AreaFrame
from src.metric.models import make_custom_model, make_model
from src.utils.errors import DegenerateSpan, InvalidConfig, UnsupportedModel

HYPERBOLIC = make_model({"kind": "hyperbolic", "dim": 2})
FUNK = make_model({"kind": "funk", "dim": 2})


def test_quadrature_weights_sum_to_sphere_area():
    quad = direction_quadrature(FUNK, [0.3, 0.0], resolution=256, seed=1)
    assert quad.total_weight == pytest.approx(2.0 * np.pi, rel=1e-6)
    np.testing.assert_allclose(FUNK.norm(np.broadcast_to(quad.p, quad.nodes.shape), quad.nodes), 1.0, rtol=1e-12)


def test_fibonacci_quadrature_in_three_dimensions():
    model = make_model({"kind": "euclidean", "dim": 3})
    quad = direction_quadrature(model, np.zeros(3), resolution=128, seed=2)
    assert quad.scheme == "fibonacci"
    assert quad.total_weight == pytest.approx(4.0 * np.pi, rel=1e-12)


def test_monte_carlo_quadrature_in_four_dimensions():
    model = make_model({"kind": "euclidean", "dim": 4})
    quad = direction_quadrature(model, np.zeros(4), resolution=64, seed=2)
    assert quad.scheme == "monte-carlo"
    assert quad.stderr is not None


def test_quadrature_is_seeded():
    first = direction_quadrature(FUNK, [0.3, 0.0], resolution=32, seed=5)
    second = direction_quadrature(FUNK, [0.3, 0.0], resolution=32, seed=5)
    assert np.array_equal(first.nodes, second.nodes)


def test_hyperbolic_eta_is_sinh():
    assert eta(HYPERBOLIC, [0.0, 0.0], [0.5, 0.0], 1.0) == pytest.approx(np.sinh(1.0), rel=1e-6)


def test_euclidean_eta_is_power_of_t():
    model = make_model({"kind": "euclidean", "dim": 3})
    assert eta(model, [1.0, 2.0, 3.0], [0.0, 0.6, 0.8], 2.0) == pytest.approx(4.0, rel=1e-6)


def test_funk_eta_closed_form():
    p = np.array([0.2, 0.1])
    y = np.array([-0.5, 0.3])
    y = y / float(FUNK.norm(p, y))
    t = 1.0
    expected = np.exp(-t) * (1.0 - np.exp(-t))
    assert eta(FUNK, p, y, t) == pytest.approx(expected, rel=1e-6)


def test_eta_needs_unit_direction():
    with pytest.raises(InvalidConfig):
        eta(HYPERBOLIC, [0.0, 0.0], [1.0, 0.0], 1.0)


def test_hyperbolic_sphere_area_and_ball_volume():
    quad = direction_quadrature(HYPERBOLIC, [0.0, 0.0], resolution=64, seed=0)
    assert sphere_area(HYPERBOLIC, quad.p, 2.0, quad) == pytest.approx(2.0 * np.pi * np.sinh(2.0), rel=1e-6)
    assert ball_volume(HYPERBOLIC, quad.p, 3.0, quad) == pytest.approx(2.0 * np.pi * (np.cosh(3.0) - 1.0), rel=1e-5)


@pytest.mark.parametrize("config,p,area", [
    ({"kind": "euclidean", "dim": 2}, [0.0, 0.0], lambda t: 2.0 * np.pi * t),
    ({"kind": "hyperbolic", "dim": 2}, [0.0, 0.0], lambda t: 2.0 * np.pi * np.sinh(t)),
    ({"kind": "funk", "dim": 2}, [0.3, 0.0], lambda t: 2.0 * np.pi * np.exp(-t) * -np.expm1(-t)),
    ({"kind": "hilbert", "dim": 2}, [0.0, 0.0], lambda t: 2.0 * np.pi * np.sinh(t)),
])
def test_sphere_area_on_every_catalog_model(config, p, area):
    model = make_model(config)
    quad = direction_quadrature(model, p, resolution=128, seed=0)
    for t in (0.5, 1.5):
        assert sphere_area(model, quad.p, t, quad) == pytest.approx(area(t), rel=1e-5)


@pytest.mark.parametrize("config,p", [
    ({"kind": "euclidean", "dim": 2}, [0.0, 0.0]),
    ({"kind": "hyperbolic", "dim": 2}, [0.0, 0.0]),
    ({"kind": "funk", "dim": 2}, [0.3, 0.0]),
    ({"kind": "hilbert", "dim": 2}, [0.0, 0.0]),
])
def test_ball_volume_grows_at_the_sphere_area(config, p):
    model = make_model(config)
    quad = direction_quadrature(model, p, resolution=32, seed=0)
    step = 1e-3
    centers = [0.5, 2.0, 5.0, 10.0]
    radii = sorted(r + s for r in centers for s in (-step, step))
    volumes = dict(zip(radii, ball_volume_profile(model, quad.p, radii, quad)))
    for r in centers:
        growth = (volumes[r + step] - volumes[r - step]) / (2.0 * step)
        assert growth == pytest.approx(sphere_area(model, quad.p, r, quad), rel=1e-2)


def test_integrated_geodesics_reproduce_hyperbolic_measurements():
    quad = direction_quadrature(HYPERBOLIC, [0.0, 0.0], resolution=8, seed=0)
    area = sphere_area(HYPERBOLIC, quad.p, 1.0, quad, method="integrate")
    assert area == pytest.approx(2.0 * np.pi * np.sinh(1.0), rel=1e-5)
    volume = ball_volume(HYPERBOLIC, quad.p, 0.5, quad, rtol=1e-3, method="integrate")
    assert volume == pytest.approx(2.0 * np.pi * (np.cosh(0.5) - 1.0), rel=1e-4)


def test_measurements_need_the_quadrature_base_point():
    quad = direction_quadrature(HYPERBOLIC, [0.0, 0.0], resolution=8, seed=0)
    with pytest.raises(InvalidConfig):
        sphere_area(HYPERBOLIC, [0.1, 0.0], 1.0, quad)
    with pytest.raises(InvalidConfig):
        ball_volume(HYPERBOLIC, [0.1, 0.0], 1.0, quad)


def test_eta_stays_positive_far_out():
    quad = direction_quadrature(HYPERBOLIC, [0.0, 0.0], resolution=16, seed=0)
    values = eta_nodes(HYPERBOLIC, quad.p, quad.nodes, 20.0)
    np.testing.assert_allclose(values, np.sinh(20.0), rtol=1e-3)
    p = np.array([0.3, 0.0])
    quad = direction_quadrature(FUNK, p, resolution=16, seed=0)
    values = eta_nodes(FUNK, p, quad.nodes, 20.0)
    assert np.all(values > 0)


def test_off_center_hyperbolic_ball_volume_is_isometry_invariant():
    quad = direction_quadrature(HYPERBOLIC, [0.4, -0.2], resolution=128, seed=0)
    assert ball_volume(HYPERBOLIC, quad.p, 1.5, quad) == pytest.approx(2.0 * np.pi * (np.cosh(1.5) - 1.0), rel=1e-4)


def test_mean_curvature_of_spheres():
    y = np.array([0.5, 0.0])
    assert mean_curvature_sphere(HYPERBOLIC, [0.0, 0.0], y, 1.0) == pytest.approx(1.0 / np.tanh(1.0), abs=1e-5)
    p = np.array([0.2, 0.1])
    u = np.array([0.3, 0.4])
    u = u / float(FUNK.norm(p, u))
    assert mean_curvature_sphere(FUNK, p, u, 1.0) == pytest.approx(-1.0 + 1.0 / np.expm1(1.0), abs=1e-5)


def test_normal_vector_of_a_vertical_line():
    q = np.array([0.3, 0.0])
    span = np.array([[0.0, 1.0]])
    n = normal_vector(FUNK, q, span, orientation=[1.0, 0.0])
    np.testing.assert_allclose(n, [0.7, 0.0], atol=1e-8)
    assert normal_residual(FUNK, q, n, span) <= 1e-8


def test_area_density_paths_agree():
    q = np.array([0.3, 0.0])
    span = np.array([[0.2, 1.0]])
    frame = AreaFrame(q=q, normal=[0.7, 0.0], tangent_basis=span)
    interior = area_density(FUNK, frame, span)
    containment = area_density(FUNK, frame, span, method="containment")
    assert containment == pytest.approx(interior, rel=1e-2)


def test_area_density_rejects_dependent_span():
    model = make_model({"kind": "euclidean", "dim": 3})
    frame = AreaFrame(q=np.zeros(3), normal=[0.0, 0.0, 1.0], tangent_basis=[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    with pytest.raises(DegenerateSpan):
        area_density(model, frame, [[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])


def test_zeta_factor():
    frame = AreaFrame(q=[0.3, 0.0], normal=[0.7, 0.0], tangent_basis=[[0.0, 1.0]])
    assert zeta_factor(HYPERBOLIC, AreaFrame(q=[0.0, 0.0], normal=[0.5, 0.0], tangent_basis=[[0.0, 1.0]])) == 1.0
    coarse = zeta_factor(FUNK, frame, samples=32768)
    fine = zeta_factor(FUNK, frame, samples=65536)
    assert coarse > 0
    assert fine == pytest.approx(coarse, rel=1e-2)


def test_monte_carlo_volume_matches_closed_forms():
    estimate, stderr = mc_ball_volume(HYPERBOLIC, [0.0, 0.0], 1.0, n_samples=100_000, seed=7)
    assert abs(estimate - 2.0 * np.pi * (np.cosh(1.0) - 1.0)) <= 4.0 * stderr
    estimate, stderr = mc_ball_volume(FUNK, [0.0, 0.0], 2.0, n_samples=100_000, seed=7)
    assert abs(estimate - np.pi * (1.0 - np.exp(-2.0)) ** 2) <= 4.0 * stderr


def test_monte_carlo_needs_a_distance():
    model = make_custom_model(lambda x, y: float(np.linalg.norm(y)), dim=2)
    with pytest.raises(UnsupportedModel):
        mc_ball_volume(model, [0.0, 0.0], 1.0)
