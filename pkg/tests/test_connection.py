from dotenv import load_dotenv

load_dotenv()
import sys

sys.path.append(".")

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from src.geodesic.connection import (
    connection_coefficients,
    covariant_derivative,
    exp_map,
    geodesic_coefficients,
    geodesic_state,
    geodesic_states,
    integrate_geodesic,
    spray_values,
)
from src.geodesic.integrator import integrate
from src.geodesic.views import StepControl
from src.metric.models import make_model
from src.utils.errors import InvalidConfig, ZeroVector

HYPERBOLIC = make_model({"kind": "hyperbolic", "dim": 2})
FUNK = make_model({"kind": "funk", "dim": 2})
HILBERT = make_model({"kind": "hilbert", "dim": 2})


def _unit(model, p, y):
    y = np.asarray(y, dtype=float)
    return y / float(model.norm(p, y))


def test_numeric_sprays_match_hyperbolic_hook():
    x = np.array([[0.2, -0.1]])
    y = np.array([[0.3, 0.5]])
    hook = spray_values(HYPERBOLIC, x, y)
    np.testing.assert_allclose(spray_values(HYPERBOLIC, x, y, "contracted"), hook, atol=1e-6)
    np.testing.assert_allclose(spray_values(HYPERBOLIC, x, y, "literal"), hook, atol=1e-6)


def test_numeric_spray_matches_funk_hook():
    x = np.array([[0.3, -0.2]])
    y = np.array([[0.4, 0.5]])
    np.testing.assert_allclose(spray_values(FUNK, x, y, "contracted"), spray_values(FUNK, x, y), atol=1e-5)


def test_spray_is_two_homogeneous():
    x, y = [0.3, -0.2], np.array([0.4, 0.5])
    G = geodesic_coefficients(FUNK, x, y)
    np.testing.assert_allclose(geodesic_coefficients(FUNK, x, 2.5 * y), 6.25 * G, rtol=1e-10)


def test_connection_euler_identity():
    x, y = np.array([0.3, -0.2]), np.array([0.4, 0.5])
    N = connection_coefficients(FUNK, x, y)
    np.testing.assert_allclose(N @ y, 2.0 * geodesic_coefficients(FUNK, x, y), atol=1e-7)
    np.testing.assert_allclose(connection_coefficients(FUNK, x, 2.0 * y), 2.0 * N, atol=1e-6)


def test_zero_direction_is_rejected():
    with pytest.raises(ZeroVector):
        geodesic_coefficients(HYPERBOLIC, [0.1, 0.1], [0.0, 0.0])


def test_exp_map_at_zero_time_is_identity():
    p = np.array([0.1, 0.2])
    assert np.array_equal(exp_map(HYPERBOLIC, p, [1.0, 0.0], 0.0), p)
    with pytest.raises(ValueError):
        exp_map(HYPERBOLIC, p, [1.0, 0.0], -1.0)


def test_integrated_hyperbolic_geodesic_from_origin():
    path = integrate_geodesic(HYPERBOLIC, [0.0, 0.0], [0.5, 0.0], 2.0)
    np.testing.assert_allclose(path.endpoint, [np.tanh(1.0), 0.0], atol=1e-8)
    assert path.speed_drift <= 1e-6
    assert not path.flagged
    assert path.times[-1] == pytest.approx(2.0)


@pytest.mark.parametrize("model,p,y,t", [
    (HYPERBOLIC, [0.1, 0.2], [0.3, -0.2], 1.5),
    (FUNK, [0.2, 0.1], [-0.5, 0.3], 2.0),
    (HILBERT, [0.2, -0.3], [0.6, 0.1], 1.0),
])
def test_closed_form_geodesics_match_integration(model, p, y, t):
    y = _unit(model, p, y)
    point, velocity = geodesic_state(model, p, y, t)
    integrated, integrated_velocity = geodesic_state(model, p, y, t, method="integrate")
    np.testing.assert_allclose(integrated, point, atol=1e-7)
    np.testing.assert_allclose(integrated_velocity, velocity, atol=1e-6)


@pytest.mark.parametrize("model", [make_model({"kind": "euclidean", "dim": 2}), HYPERBOLIC, FUNK, HILBERT])
def test_batched_closed_form_states_match_integration(model):
    p = np.array([0.2, -0.1])
    Y = np.array([[0.3, 0.1], [-0.5, 0.4], [0.0, -0.2], [0.25, 0.25]])
    points, velocities = geodesic_states(model, np.broadcast_to(p, Y.shape), Y, 0.7)
    assert points.shape == velocities.shape == Y.shape
    for y, point, velocity in zip(Y, points, velocities):
        integrated, integrated_velocity = geodesic_state(model, p, y, 0.7, method="integrate")
        np.testing.assert_allclose(point, integrated, atol=1e-7)
        np.testing.assert_allclose(velocity, integrated_velocity, atol=1e-6)


def test_exponential_map_is_injective_out_to_twenty():
    angles = np.linspace(0.0, 2.0 * np.pi, 48, endpoint=False)
    circle = np.column_stack([np.cos(angles), np.sin(angles)])
    for model, p in ((HYPERBOLIC, np.array([0.0, 0.0])), (FUNK, np.array([0.3, 0.0]))):
        U = circle / model.norm(p, circle)[:, None]
        P = np.broadcast_to(p, U.shape)
        endpoints = [geodesic_states(model, P, U, t)[0] for t in (0.5, 1.0, 2.0, 5.0, 10.0, 20.0)]
        assert pdist(np.concatenate(endpoints)).min() > 1e-9


def test_exp_map_homogeneity():
    p = np.array([0.2, 0.1])
    y = _unit(FUNK, p, [-0.5, 0.3])
    np.testing.assert_allclose(exp_map(FUNK, p, 2.0 * y, 0.5), exp_map(FUNK, p, y, 1.0), atol=1e-12)


def test_funk_geodesic_stays_on_its_line():
    p = np.array([0.2, 0.1])
    y = _unit(FUNK, p, [-0.5, 0.3])
    path = integrate_geodesic(FUNK, p, y, 1.0)
    offsets = path.points - p
    line = y / np.linalg.norm(y)
    transverse = offsets - np.outer(offsets @ line, line)
    assert np.abs(transverse).max() <= 1e-8


def test_geodesic_reaching_the_margin_is_truncated():
    path = integrate_geodesic(FUNK, [0.0, 0.0], [1.0, 0.0], 40.0)
    assert path.truncated
    assert path.flagged
    assert path.times[-1] < 40.0
    assert np.all(FUNK.is_interior(path.points))


def test_fixed_step_rk4_is_fourth_order():
    def rhs(t, z):
        return np.array([z[1], -z[0]])

    errors = []
    for step in (0.1, 0.05):
        traj = integrate(rhs, np.array([0.0, 1.0]), 2.0, StepControl(initial_step=step, adaptive=False))
        errors.append(abs(traj.states[-1][0] - np.sin(2.0)))
    assert errors[0] / errors[1] == pytest.approx(16.0, rel=0.2)


def test_step_control_validation():
    with pytest.raises(InvalidConfig):
        StepControl(initial_step=0.0)


def test_covariant_derivative_of_the_flagpole():
    # D_y y = N y = 2G = F y on the projectively flat Funk spray
    x, y = np.array([0.3, -0.2]), np.array([0.4, 0.5])
    value = covariant_derivative(FUNK, x, y, y, np.zeros(2))
    np.testing.assert_allclose(value, float(FUNK.norm(x, y)) * y, atol=1e-6)
