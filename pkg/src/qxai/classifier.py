"""2x2 bars-and-stripes data, reference circuits and a small trainer."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .circuit import EXACT, CircuitSpec, Evaluator, GateOp, NoiseSpec, evaluate_angles, resolve_angles

STRIPES, BARS = "stripes", "bars"
LABEL_VALUE = {STRIPES: 1.0, BARS: -1.0}
N_PIXELS = 4
CIRCUIT_KINDS = ("single-qubit", "two-qubit", "four-qubit")


@dataclass(frozen=True)
class BarsStripesImage:
    """Four pixels in row-major 2x2 order."""

    pixels: tuple[int, int, int, int]
    label: str

    def __post_init__(self):
        p = self.pixels
        stripes = p[0] == p[1] and p[2] == p[3]
        bars = p[0] == p[2] and p[1] == p[3]
        if stripes == bars:
            raise ValueError(f"{p} is not a bars-or-stripes image")
        if self.label != (STRIPES if stripes else BARS):
            raise ValueError(f"{p} is labelled {self.label!r}")

    @property
    def target(self) -> float:
        return LABEL_VALUE[self.label]


def dataset() -> list[BarsStripesImage]:
    """The four non-uniform 2x2 images: two stripes, then two bars."""
    return [
        BarsStripesImage((1, 1, 0, 0), STRIPES),
        BarsStripesImage((0, 0, 1, 1), STRIPES),
        BarsStripesImage((1, 0, 1, 0), BARS),
        BarsStripesImage((0, 1, 0, 1), BARS),
    ]


def _normalize_kind(kind: str) -> str:
    k = kind.lower().replace("_", "-")
    aliases = {"single": "single-qubit", "singlequbit": "single-qubit", "two": "two-qubit",
               "twoqubit": "two-qubit", "four": "four-qubit", "fourqubit": "four-qubit"}
    k = aliases.get(k, k)
    if k not in CIRCUIT_KINDS:
        raise ValueError(f"unknown circuit kind {kind!r}; choose from {CIRCUIT_KINDS}")
    return k


def reference_circuit(kind: str) -> CircuitSpec:
    kind = _normalize_kind(kind)
    F, C = "feature", "control"
    if kind == "single-qubit":
        gates = [GateOp.rx(0, F, 0), GateOp.ry(0, C, 0), GateOp.rx(0, F, 1)]
        return CircuitSpec(1, gates, measured=0)
    if kind == "two-qubit":
        gates = [
            GateOp.rx(0, F, 0), GateOp.rx(1, F, 1),
            GateOp.ry(0, C, 0), GateOp.ry(1, C, 1),
            GateOp.cnot(0, 1),
            GateOp.ry(0, C, 2), GateOp.ry(1, C, 3),
            GateOp.rx(0, C, 4), GateOp.rx(1, C, 5),
            GateOp.cnot(0, 1),
            GateOp.ry(0, C, 6), GateOp.ry(1, C, 7),
        ]
        return CircuitSpec(2, gates, measured=1)
    ladder = [GateOp.cnot(0, 1), GateOp.cnot(0, 2), GateOp.cnot(1, 3), GateOp.cnot(2, 3)]
    gates = [GateOp.rx(q, F, q) for q in range(4)]
    gates += [GateOp.ry(q, C, q) for q in range(4)]
    gates += ladder
    gates += [GateOp.ry(q, C, 4 + q) for q in range(4)]
    gates += [GateOp.rx(q, C, 8 + q) for q in range(4)]
    gates += ladder
    gates += [GateOp.ry(q, C, 12 + q) for q in range(4)]
    return CircuitSpec(4, gates, measured=3)


def reference_pixels(kind: str) -> tuple[int, ...]:
    """Which pixel feeds each circuit feature."""
    kind = _normalize_kind(kind)
    return (0, 1, 2, 3) if kind == "four-qubit" else (0, 1)


@dataclass
class TrainedModel:
    circuit: CircuitSpec
    controls: np.ndarray
    scaling: tuple[float, float] = (0.0, np.pi)
    pixels: tuple[int, ...] | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.controls = np.asarray(self.controls, dtype=float)
        if self.controls.size != self.circuit.control_count:
            raise ValueError(f"expected {self.circuit.control_count} controls, got {self.controls.size}")
        if self.pixels is None:
            self.pixels = tuple(range(self.circuit.feature_count))
        self.pixels = tuple(int(p) for p in self.pixels)
        self.scaling = (float(self.scaling[0]), float(self.scaling[1]))

    def angles(self, pixels) -> np.ndarray:
        """Map pixel values to rotation angles (affine, 0 -> zero, 1 -> one)."""
        zero, one = self.scaling
        return zero + np.asarray(pixels, dtype=float) * (one - zero)

    def evaluator(self, noise: NoiseSpec = EXACT) -> Evaluator:
        """The model as a function of the four pixel angles."""
        return Evaluator(self.circuit, self.controls, noise, input_map=self.pixels, n_inputs=N_PIXELS)

    @property
    def frequency_bounds(self) -> tuple[int, ...]:
        return self.evaluator().frequency_bounds

    def predict(self, pixels, noise: NoiseSpec = EXACT) -> float:
        return self.evaluator(noise)(self.angles(pixels))

    def accuracy(self, data=None) -> float:
        data = dataset() if data is None else data
        hits = [np.sign(self.predict(img.pixels)) == img.target for img in data]
        return float(np.mean(hits))

    def to_dict(self) -> dict:
        d = {
            "circuit": self.circuit.to_dict(),
            "controls": self.controls.tolist(),
            "scaling": {"zero": self.scaling[0], "one": self.scaling[1]},
            "pixels": list(self.pixels),
        }
        if self.info:
            d["info"] = self.info
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        scaling = d.get("scaling", {"zero": 0.0, "one": np.pi})
        return cls(
            CircuitSpec.from_dict(d["circuit"]),
            np.asarray(d["controls"], dtype=float),
            (scaling["zero"], scaling["one"]),
            tuple(d["pixels"]) if "pixels" in d else None,
            dict(d.get("info", {})),
        )

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "TrainedModel":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "TrainedModel":
        return cls.from_json(Path(path).read_text())


def parameter_shift_gradient(circuit: CircuitSpec, features, controls) -> np.ndarray:
    """Exact gradient of ``<Z>`` w.r.t. the controls via the +-pi/2 shift rule.

    Controls bound to several gates get one shifted pair per gate.
    """
    base = resolve_angles(circuit, features, controls)
    grad = np.zeros(circuit.control_count)
    for i, g in enumerate(circuit.gates):
        if g.angle is None or g.angle[0] != "control":
            continue
        plus, minus = base.copy(), base.copy()
        plus[i] += np.pi / 2
        minus[i] -= np.pi / 2
        grad[int(g.angle[1])] += 0.5 * (evaluate_angles(circuit, plus) - evaluate_angles(circuit, minus))
    return grad


def train(circuit: CircuitSpec | str, data=None, lr: float = 0.2, epochs: int = 200, seed: int = 0,
          scaling=(0.0, np.pi), pixels=None) -> TrainedModel:
    """Full-batch gradient descent on the mean squared error against +-1 labels.

    Stripes map to +1 and bars to -1. The returned model carries the final
    loss and accuracy in ``info``; not reaching 100% is reported, not raised.
    """
    if isinstance(circuit, str):
        if pixels is None:
            pixels = reference_pixels(circuit)
        circuit = reference_circuit(circuit)
    data = dataset() if data is None else data
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-np.pi, np.pi, circuit.control_count)
    model = TrainedModel(circuit, theta.copy(), scaling, pixels)
    feats = [model.angles(np.asarray(img.pixels))[list(model.pixels)] for img in data]
    targets = np.array([img.target for img in data])
    for _ in range(epochs):
        grad = np.zeros_like(theta)
        for phi, y in zip(feats, targets):
            out = evaluate_angles(circuit, resolve_angles(circuit, phi, theta))
            grad += 2 * (out - y) * parameter_shift_gradient(circuit, phi, theta)
        theta -= lr * grad / len(data)
    model.controls = theta
    preds = np.array([evaluate_angles(circuit, resolve_angles(circuit, phi, theta)) for phi in feats])
    model.info = {
        "loss": float(np.mean((preds - targets) ** 2)),
        "accuracy": float(np.mean(np.sign(preds) == targets)),
        "epochs": epochs,
        "lr": lr,
        "seed": seed,
    }
    return model


def load_reference_model(kind: str) -> TrainedModel:
    """Shipped model trained with a pinned seed (see ``demos/train_reference_models.py``)."""
    kind = _normalize_kind(kind)
    name = kind.replace("-", "_") + ".json"
    text = resources.files("qxai.data").joinpath(name).read_text()
    return TrainedModel.from_json(text)
