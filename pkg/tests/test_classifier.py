import json

import numpy as np
import pytest

from qxai.circuit import evaluate
from qxai.classifier import (
    BarsStripesImage, TrainedModel, dataset, load_reference_model, parameter_shift_gradient,
    reference_circuit, train,
)


def test_dataset():
    data = dataset()
    assert len(data) == 4
    by_pixels = {img.pixels: img.label for img in data}
    assert by_pixels[(1, 0, 1, 0)] == "bars"
    assert by_pixels[(1, 1, 0, 0)] == "stripes"
    assert sorted(by_pixels.values()) == ["bars", "bars", "stripes", "stripes"]


def test_image_validation():
    with pytest.raises(ValueError):
        BarsStripesImage((1, 1, 1, 1), "stripes")
    with pytest.raises(ValueError):
        BarsStripesImage((1, 1, 0, 0), "bars")


@pytest.mark.parametrize("kind,features,controls,measured", [
    ("single-qubit", 2, 1, 0),
    ("two-qubit", 2, 8, 1),
    ("four-qubit", 4, 16, 3),
])
def test_reference_circuits(kind, features, controls, measured):
    c = reference_circuit(kind)
    assert c.feature_count == features
    assert c.control_count == controls
    assert c.measured == measured
    assert c.encoding_multiplicity == (1,) * features


def test_single_qubit_gate_sequence():
    c = reference_circuit("single-qubit")
    assert [(g.kind, g.angle) for g in c.gates] == [("RX", ("feature", 0)), ("RY", ("control", 0)), ("RX", ("feature", 1))]


def test_four_qubit_ladder():
    c = reference_circuit("four-qubit")
    cnots = [(g.control, g.target) for g in c.gates if g.kind == "CNOT"]
    assert cnots == [(0, 1), (0, 2), (1, 3), (2, 3)] * 2


def test_unknown_kind():
    with pytest.raises(ValueError):
        reference_circuit("bogus")


@pytest.mark.parametrize("kind", ["single-qubit", "two-qubit", "four-qubit"])
def test_parameter_shift_matches_finite_differences(kind):
    c = reference_circuit(kind)
    rng = np.random.default_rng(2)
    h = 1e-5
    for _ in range(50 if kind != "four-qubit" else 10):
        phi = rng.uniform(0, 2 * np.pi, c.feature_count)
        theta = rng.uniform(-np.pi, np.pi, c.control_count)
        g = parameter_shift_gradient(c, phi, theta)
        fd = np.array([
            (evaluate(c, phi, theta + h * e) - evaluate(c, phi, theta - h * e)) / (2 * h)
            for e in np.eye(c.control_count)
        ])
        np.testing.assert_allclose(g, fd, atol=1e-6)


def test_train_single_qubit_learns_xor():
    m = train("single-qubit", seed=7, epochs=200)
    assert m.accuracy() == 1.0
    # parity of the two top pixels decides the sign
    for p0 in (0, 1):
        for p1 in (0, 1):
            assert np.sign(m.predict([p0, p1, 0, 0])) == (1 if p0 == p1 else -1)


def test_zero_epochs_returns_initial_parameters():
    m = train("two-qubit", seed=3, epochs=0)
    init = np.random.default_rng(3).uniform(-np.pi, np.pi, 8)
    np.testing.assert_array_equal(m.controls, init)
    assert "accuracy" in m.info


@pytest.mark.slow
def test_train_four_qubit():
    assert train("four-qubit", seed=1, epochs=200).accuracy() == 1.0


@pytest.mark.parametrize("kind", ["single-qubit", "two-qubit", "four-qubit"])
def test_reference_models_classify_everything(kind):
    m = load_reference_model(kind)
    assert m.accuracy() == 1.0
    assert m.circuit == reference_circuit(kind)


def test_model_json_round_trip():
    m = load_reference_model("two-qubit")
    d = json.loads(m.to_json())
    assert {"circuit", "controls", "scaling"} <= set(d)
    assert d["scaling"] == {"zero": 0.0, "one": pytest.approx(np.pi)}
    back = TrainedModel.from_json(m.to_json())
    np.testing.assert_array_equal(back.controls, m.controls)
    assert back.pixels == (0, 1)


def test_scaling_and_bounds():
    m = load_reference_model("single-qubit")
    np.testing.assert_allclose(m.angles([0, 1, 1, 0]), [0, np.pi, np.pi, 0])
    assert m.frequency_bounds == (1, 1, 0, 0)
    assert load_reference_model("four-qubit").frequency_bounds == (1, 1, 1, 1)
