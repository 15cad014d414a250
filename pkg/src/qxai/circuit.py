"""State-vector simulation of parameterized quantum circuits.

Gates act on a state stored as an ``(2,) * n_qubits`` complex tensor, qubit 0
being the leading axis. Rotations use the half-angle convention
``R_P(t) = exp(-i t P / 2)`` and the readout is ``<Z>`` on one qubit with
``|0> -> +1``.

Noise is parametric (see :class:`NoiseSpec`). Depolarizing noise is applied by
Pauli-trajectory sampling so memory stays at ``O(2**n)``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

GATE_KINDS = ("RX", "RY", "RZ", "CNOT")
NORM_TOL = 1e-12

_PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class CircuitError(ValueError):
    """Raised for malformed circuits, gates or parameter vectors."""


@dataclass(frozen=True)
class GateOp:
    """One gate of a circuit.

    ``angle`` is ``("feature", i)``, ``("control", j)`` or ``("constant", radians)``
    for rotations and ``None`` for CNOT.
    """

    kind: str
    target: int
    control: int | None = None
    angle: tuple[str, float] | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}; expected one of {GATE_KINDS}")
        if self.kind == "CNOT":
            if self.control is None:
                raise CircuitError("CNOT needs a control qubit")
            if self.control == self.target:
                raise CircuitError("CNOT control and target must differ")
            if self.angle is not None:
                raise CircuitError("CNOT takes no angle")
        else:
            if self.control is not None:
                raise CircuitError(f"{self.kind} takes no control qubit")
            if self.angle is None or self.angle[0] not in ("feature", "control", "constant"):
                raise CircuitError(f"{self.kind} needs an angle source, got {self.angle!r}")
            if self.angle[0] != "constant" and (
                int(self.angle[1]) != self.angle[1] or self.angle[1] < 0
            ):
                raise CircuitError(f"parameter index must be a non-negative integer: {self.angle!r}")

    @classmethod
    def rx(cls, target, source, value):
        return cls("RX", target, angle=(source, value))

    @classmethod
    def ry(cls, target, source, value):
        return cls("RY", target, angle=(source, value))

    @classmethod
    def rz(cls, target, source, value):
        return cls("RZ", target, angle=(source, value))

    @classmethod
    def cnot(cls, control, target):
        return cls("CNOT", target, control=control)

    def to_dict(self) -> dict:
        if self.kind == "CNOT":
            return {"kind": "CNOT", "control": self.control, "target": self.target}
        source, value = self.angle
        value = float(value) if source == "constant" else int(value)
        return {"kind": self.kind, "target": self.target, "angle": {source: value}}

    @classmethod
    def from_dict(cls, d: dict) -> "GateOp":
        try:
            kind = d["kind"]
            target = int(d["target"])
            if kind == "CNOT":
                return cls(kind, target, control=int(d["control"]))
            ((source, value),) = d["angle"].items()
        except (KeyError, TypeError, ValueError) as exc:
            raise CircuitError(f"malformed gate entry {d!r}") from exc
        if source != "constant":
            value = int(value)
        return cls(kind, target, angle=(source, value))


@dataclass(frozen=True)
class CircuitSpec:
    """An ordered gate list with a single measured qubit."""

    qubits: int
    gates: tuple[GateOp, ...]
    measured: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.qubits < 1:
            raise CircuitError("qubit count must be positive")
        if not 0 <= self.measured < self.qubits:
            raise CircuitError(f"measured qubit {self.measured} out of range for {self.qubits} qubits")
        for g in self.gates:
            for q in (g.target, g.control):
                if q is not None and not 0 <= q < self.qubits:
                    raise CircuitError(f"gate {g} addresses qubit {q} outside 0..{self.qubits - 1}")
        for source in ("feature", "control"):
            used = {int(g.angle[1]) for g in self.gates if g.angle and g.angle[0] == source}
            if used and used != set(range(max(used) + 1)):
                missing = sorted(set(range(max(used) + 1)) - used)
                raise CircuitError(f"{source} indices are not dense, missing {missing}")

    def _count(self, source):
        idx = [int(g.angle[1]) for g in self.gates if g.angle and g.angle[0] == source]
        return max(idx) + 1 if idx else 0

    @property
    def feature_count(self) -> int:
        return self._count("feature")

    @property
    def control_count(self) -> int:
        return self._count("control")

    @property
    def encoding_multiplicity(self) -> tuple[int, ...]:
        counts = [0] * self.feature_count
        for g in self.gates:
            if g.angle and g.angle[0] == "feature":
                counts[int(g.angle[1])] += 1
        return tuple(counts)

    @property
    def two_qubit_gates(self) -> int:
        return sum(g.kind == "CNOT" for g in self.gates)

    def to_dict(self) -> dict:
        return {
            "qubits": self.qubits,
            "measured": self.measured,
            "gates": [g.to_dict() for g in self.gates],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CircuitSpec":
        try:
            gates = [GateOp.from_dict(g) for g in d["gates"]]
            return cls(int(d["qubits"]), tuple(gates), int(d.get("measured", 0)))
        except (KeyError, TypeError) as exc:
            raise CircuitError(f"malformed circuit document: {exc}") from exc

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "CircuitSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class NoiseSpec:
    """Parametric evaluation noise.

    ``shots=None`` means the exact expectation is returned. Depolarizing noise
    hits each CNOT with probability ``depolarizing_p``; readout flips each
    measured bit with probability ``readout_flip_p``; ``additive_sigma`` adds
    zero-mean Gaussian noise to the returned value.
    """

    shots: int | None = None
    depolarizing_p: float = 0.0
    readout_flip_p: float = 0.0
    additive_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.shots is not None and int(self.shots) < 1:
            raise CircuitError("shots must be a positive integer")
        for name in ("depolarizing_p", "readout_flip_p"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise CircuitError(f"{name}={p} outside [0, 1]")
        if self.additive_sigma < 0:
            raise CircuitError("additive_sigma must be >= 0")

    @property
    def is_exact(self) -> bool:
        return (
            self.shots is None
            and self.depolarizing_p == 0
            and self.readout_flip_p == 0
            and self.additive_sigma == 0
        )


EXACT = NoiseSpec()


def rotation_matrix(kind: str, theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])
    raise CircuitError(f"{kind} is not a rotation")


def zero_state(qubits: int) -> np.ndarray:
    state = np.zeros((2,) * qubits, dtype=complex)
    state[(0,) * qubits] = 1.0
    return state


def _apply_1q(state, u, q):
    out = np.tensordot(u, state, axes=([1], [q]))
    return np.moveaxis(out, 0, q)


def _apply_cnot(state, control, target):
    out = state.copy()
    sel = [slice(None)] * state.ndim
    sel[control] = 1
    sub = out[tuple(sel)]
    # target axis index shifts down by one if it sits after the removed control axis
    t = target - (target > control)
    out[tuple(sel)] = np.flip(sub, axis=t).copy()
    return out


def apply_gate(state: np.ndarray, gate: GateOp, angle: float | None = None) -> np.ndarray:
    """Return the state after ``gate``; ``angle`` is the resolved rotation angle."""
    state = np.asarray(state, dtype=complex)
    n = state.ndim
    for q in (gate.target, gate.control):
        if q is not None and not 0 <= q < n:
            raise CircuitError(f"gate {gate} addresses qubit {q} of a {n}-qubit state")
    if gate.kind == "CNOT":
        return _apply_cnot(state, gate.control, gate.target)
    if angle is None:
        if gate.angle[0] != "constant":
            raise CircuitError(f"gate {gate} needs a resolved angle")
        angle = gate.angle[1]
    return _apply_1q(state, rotation_matrix(gate.kind, angle), gate.target)


def expectation_z(state: np.ndarray, qubit: int) -> float:
    p = np.abs(state) ** 2
    p = np.moveaxis(p, qubit, 0).reshape(2, -1).sum(axis=1)
    return float(p[0] - p[1])


def resolve_angles(circuit: CircuitSpec, features, controls) -> np.ndarray:
    """Per-gate rotation angles (NaN for CNOTs)."""
    features = np.asarray(features, dtype=float).ravel()
    controls = np.asarray(controls, dtype=float).ravel()
    if features.size != circuit.feature_count:
        raise CircuitError(f"expected {circuit.feature_count} features, got {features.size}")
    if controls.size != circuit.control_count:
        raise CircuitError(f"expected {circuit.control_count} controls, got {controls.size}")
    out = np.full(len(circuit.gates), np.nan)
    for i, g in enumerate(circuit.gates):
        if g.angle is None:
            continue
        source, value = g.angle
        if source == "feature":
            out[i] = features[int(value)]
        elif source == "control":
            out[i] = controls[int(value)]
        else:
            out[i] = value
    return out


def run(circuit: CircuitSpec, angles: np.ndarray, paulis: Sequence[int] = ()) -> np.ndarray:
    """Simulate with per-gate angles.

    ``paulis`` optionally gives, for each CNOT in order, an index in 0..15 of a
    two-qubit Pauli (control, target) applied right after it; 0 is identity.
    """
    state = zero_state(circuit.qubits)
    k = 0
    for g, a in zip(circuit.gates, angles):
        if g.kind == "CNOT":
            state = _apply_cnot(state, g.control, g.target)
            if k < len(paulis) and paulis[k]:
                pc, pt = divmod(int(paulis[k]), 4)
                if pc:
                    state = _apply_1q(state, _PAULI[pc], g.control)
                if pt:
                    state = _apply_1q(state, _PAULI[pt], g.target)
            k += 1
        else:
            state = _apply_1q(state, rotation_matrix(g.kind, a), g.target)
    return state


def run_trajectories(circuit: CircuitSpec, angles: np.ndarray, patterns) -> np.ndarray:
    """Simulate many Pauli-error patterns at once; returns ``<Z>`` per pattern.

    ``patterns`` has one row per trajectory in the format of :func:`run`.
    States are stacked along a leading batch axis, so memory is
    ``len(patterns) * 2**qubits``.
    """
    patterns = np.atleast_2d(np.asarray(patterns, dtype=int))
    B, n = patterns.shape[0], circuit.qubits
    state = np.broadcast_to(zero_state(n), (B,) + (2,) * n).copy()
    k = 0
    for g, a in zip(circuit.gates, angles):
        if g.kind == "CNOT":
            state = _apply_cnot(state, g.control + 1, g.target + 1)
            if k < patterns.shape[1]:
                for code in np.unique(patterns[:, k]):
                    if code == 0:
                        continue
                    rows = patterns[:, k] == code
                    pc, pt = divmod(int(code), 4)
                    sub = state[rows]
                    if pc:
                        sub = _apply_1q(sub, _PAULI[pc], g.control + 1)
                    if pt:
                        sub = _apply_1q(sub, _PAULI[pt], g.target + 1)
                    state[rows] = sub
            k += 1
        else:
            state = _apply_1q(state, rotation_matrix(g.kind, a), g.target + 1)
    p = np.moveaxis(np.abs(state) ** 2, circuit.measured + 1, 1).reshape(B, 2, -1).sum(axis=2)
    return p[:, 0] - p[:, 1]


def call_rng(seed: int, call_index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(call_index)])


def evaluate_angles(circuit: CircuitSpec, angles, noise: NoiseSpec = EXACT, call_index: int = 0) -> float:
    """``<Z>`` on the measured qubit for already-resolved gate angles.

    Depolarizing noise is sampled per shot as a Pauli trajectory; shots that
    drew the same error pattern are simulated together.
    """
    if noise.is_exact:
        return expectation_z(run(circuit, angles), circuit.measured)
    rng = call_rng(noise.seed, call_index)
    m = circuit.measured
    n_2q = circuit.two_qubit_gates
    q = noise.readout_flip_p
    if noise.shots is None:
        paulis = ()
        if noise.depolarizing_p > 0 and n_2q:
            # one sampled trajectory stands in for the channel average
            hit = rng.random(n_2q) < noise.depolarizing_p
            paulis = np.where(hit, rng.integers(0, 16, n_2q), 0)
        value = (1 - 2 * q) * expectation_z(run(circuit, angles, paulis), m)
    else:
        shots = int(noise.shots)
        if noise.depolarizing_p > 0 and n_2q:
            hit = rng.random((shots, n_2q)) < noise.depolarizing_p
            pattern = np.where(hit, rng.integers(0, 16, (shots, n_2q)), 0)
            patterns, counts = np.unique(pattern, axis=0, return_counts=True)
            z = run_trajectories(circuit, angles, patterns)
        else:
            counts = np.array([shots])
            z = np.array([expectation_z(run(circuit, angles), m)])
        p1 = np.clip((1 - z) / 2, 0.0, 1.0)
        p1 = p1 * (1 - q) + (1 - p1) * q
        ones = int(rng.binomial(counts, p1).sum())
        value = (shots - 2 * ones) / shots
    if noise.additive_sigma > 0:
        value += noise.additive_sigma * rng.standard_normal()
    return float(value)


def evaluate(circuit: CircuitSpec, features, controls, noise: NoiseSpec = EXACT, call_index: int = 0) -> float:
    """Expectation of Z on ``circuit.measured`` at the given parameters.

    Each call draws from its own generator seeded by ``(noise.seed, call_index)``.
    """
    return evaluate_angles(circuit, resolve_angles(circuit, features, controls), noise, call_index)


def evaluate_batch(circuit: CircuitSpec, feature_matrix, controls, noise: NoiseSpec = EXACT, start_index: int = 0) -> np.ndarray:
    feature_matrix = np.atleast_2d(np.asarray(feature_matrix, dtype=float))
    return np.array([
        evaluate(circuit, row, controls, noise, call_index=start_index + i)
        for i, row in enumerate(feature_matrix)
    ])


class Evaluator:
    """A circuit with fixed controls exposed as a plain function of its inputs.

    ``input_map[i]`` names the input coordinate that feeds circuit feature ``i``;
    inputs not listed are ignored by the circuit. Every call advances an
    internal counter, so noisy evaluations draw fresh but reproducible noise.
    """

    def __init__(self, circuit: CircuitSpec, controls, noise: NoiseSpec = EXACT,
                 input_map: Iterable[int] | None = None, n_inputs: int | None = None):
        self.circuit = circuit
        self.controls = np.asarray(controls, dtype=float)
        self.noise = noise
        self.input_map = np.arange(circuit.feature_count) if input_map is None else np.asarray(list(input_map), dtype=int)
        if self.input_map.size != circuit.feature_count:
            raise CircuitError("input_map must list one input per circuit feature")
        self.n_inputs = int(n_inputs) if n_inputs is not None else int(self.input_map.max(initial=-1)) + 1
        self.calls = 0
        self._counter = itertools.count()

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.n_inputs:
            raise CircuitError(f"expected {self.n_inputs} inputs, got {x.size}")
        self.calls += 1
        return evaluate(self.circuit, x[self.input_map], self.controls, self.noise, next(self._counter))

    @property
    def frequency_bounds(self) -> tuple[int, ...]:
        """Per-input encoding multiplicity (0 for inputs the circuit never reads)."""
        bounds = [0] * self.n_inputs
        for feat, mult in enumerate(self.circuit.encoding_multiplicity):
            bounds[self.input_map[feat]] += mult
        return tuple(bounds)
