from dotenv import load_dotenv

load_dotenv()
import sys

sys.path.append(".")

import numpy as np
import pytest

from src.metric.models import bound_params_from_model, make_custom_model, make_model, parse_model_config
from src.metric.norms import tensor_stack
from src.measure.oracle import distances
from src.utils.errors import InadmissibleModel, InvalidConfig


def test_hyperbolic_defaults():
    config = parse_model_config({"kind": "hyperbolic", "dim": 2})
    assert config.k == 1.0
    assert config.body is None


def test_funk_defaults_to_unit_ball():
    model = make_model({"kind": "funk", "dim": 2})
    assert model.body.kind == "unit-ball"
    facts = model.facts
    assert facts.expected_flag_curvature == -0.25
    assert facts.expected_s_curvature == 1.5
    assert facts.expected_s_coefficient == 1.5
    assert facts.has_bounds
    assert not facts.admissible


def test_negative_curvature_scale_is_rejected():
    with pytest.raises(InvalidConfig) as e:
        make_model({"kind": "hyperbolic", "k": -1, "dim": 2})
    assert any(field == "k" for field, _ in e.value.errors)
    assert e.value.exit_code == 2


def test_body_on_hyperbolic_is_rejected():
    with pytest.raises(InvalidConfig):
        make_model({"kind": "hyperbolic", "dim": 2, "body": {"kind": "unit-ball"}})


def test_ellipsoid_needs_axes():
    with pytest.raises(InvalidConfig):
        make_model({"kind": "hilbert", "dim": 2, "body": {"kind": "ellipsoid"}})


def test_body_dimension_mismatch():
    with pytest.raises(InvalidConfig):
        make_model({"kind": "funk", "dim": 3, "body": {"kind": "ellipsoid", "semi_axes": [1.0, 2.0]}})


def test_unknown_keys_are_rejected():
    with pytest.raises(InvalidConfig):
        make_model({"kind": "euclidean", "dim": 2, "colour": "red"})


def test_bound_params_for_hyperbolic():
    params = bound_params_from_model(make_model({"kind": "hyperbolic", "dim": 3, "k": 2.0}))
    assert (params.n, params.k1, params.k2, params.delta1, params.delta2) == (2, 2.0, 2.0, 0.0, 0.0)
    assert params.admissible


def test_euclidean_has_no_pinch():
    with pytest.raises(InadmissibleModel):
        bound_params_from_model(make_model({"kind": "euclidean", "dim": 2}))


def test_custom_model_uses_numeric_tensor():
    model = make_custom_model(lambda x, y: float(np.linalg.norm(y)), dim=2)
    g = tensor_stack(model, np.array([[0.1, 0.2]]), np.array([[0.3, -0.4]]))[0]
    np.testing.assert_allclose(g, np.eye(2), atol=1e-7)


def test_custom_model_homogeneity_check():
    with pytest.raises(InvalidConfig) as e:
        make_custom_model(lambda x, y: float(np.linalg.norm(y)) ** 2, dim=2)
    assert e.value.errors[0][0] == "norm"


def test_hyperbolic_distance_hook():
    model = make_model({"kind": "hyperbolic", "dim": 2})
    point = np.array([[np.tanh(0.5), 0.0]])
    assert distances(model, np.zeros(2), point)[0] == pytest.approx(1.0, rel=1e-12)


def test_funk_and_hilbert_chord_distances():
    funk = make_model({"kind": "funk", "dim": 2})
    hilbert = make_model({"kind": "hilbert", "dim": 2})
    point = np.array([[0.5, 0.0]])
    assert distances(funk, np.zeros(2), point)[0] == pytest.approx(np.log(2.0), rel=1e-10)
    assert distances(hilbert, np.zeros(2), point)[0] == pytest.approx(0.5 * np.log(3.0), rel=1e-10)
