"""Truncated Fourier series of circuit outputs.

A circuit whose feature ``i`` is encoded ``N_i`` times by rotation gates
produces an output of the form

    f(phi) = sum_w a_w sin<w, phi> + b_w cos<w, phi>,   w in prod_i [-N_i, N_i]

Only one of each pair ``{w, -w}`` is stored (the one whose first nonzero
component is positive), which makes the coefficients unique and the least
squares problem well posed.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_triangular


class FourierFitError(ValueError):
    pass


def is_canonical(omega) -> bool:
    """True for the zero vector and for vectors whose first nonzero entry is positive."""
    for w in omega:
        if w:
            return w > 0
    return True


@dataclass(frozen=True)
class FrequencyLattice:
    """Integer wave vectors ``prod_i [-N_i, N_i]``."""

    bounds: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bounds", tuple(int(b) for b in self.bounds))
        if any(b < 0 for b in self.bounds):
            raise ValueError("frequency bounds must be >= 0")

    @property
    def n(self) -> int:
        return len(self.bounds)

    @property
    def size(self) -> int:
        return math.prod(2 * b + 1 for b in self.bounds)

    def __len__(self):
        return self.size

    def __iter__(self):
        return itertools.product(*(range(-b, b + 1) for b in self.bounds))

    def half(self) -> list[tuple[int, ...]]:
        """Canonical representatives, zero vector first."""
        zero = (0,) * self.n
        return [zero] + [w for w in self if w != zero and is_canonical(w)]

    @property
    def unknowns(self) -> int:
        # one cosine per canonical vector, one sine per nonzero canonical vector
        return 2 * len(self.half()) - 1


@dataclass
class FourierSeries:
    """Mapping from canonical wave vector to ``(a, b)`` = (sine, cosine) coefficient."""

    n: int
    terms: dict[tuple[int, ...], tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for omega, (a, b) in self.terms.items():
            omega = tuple(int(w) for w in omega)
            if len(omega) != self.n:
                raise ValueError(f"wave vector {omega} has wrong length for n={self.n}")
            if not is_canonical(omega):
                omega = tuple(-w for w in omega)
                a = -a
            if not any(omega):
                a = 0.0
            prev = clean.get(omega, (0.0, 0.0))
            clean[omega] = (prev[0] + float(a), prev[1] + float(b))
        self.terms = clean

    def __call__(self, phi) -> float:
        return eval_series(self, phi)

    def __len__(self):
        return len(self.terms)

    def coefficient(self, omega) -> tuple[float, float]:
        omega = tuple(omega)
        if is_canonical(omega):
            return self.terms.get(omega, (0.0, 0.0))
        a, b = self.terms.get(tuple(-w for w in omega), (0.0, 0.0))
        return -a, b

    def support(self) -> set[tuple[int, ...]]:
        return set(self.terms)

    def shifted(self, center) -> "FourierSeries":
        """The same function written in the coordinate ``z = phi - center``."""
        center = np.asarray(center, dtype=float)
        terms = {}
        for omega, (a, b) in self.terms.items():
            s = float(np.dot(omega, center))
            cs, sn = math.cos(s), math.sin(s)
            terms[omega] = (a * cs - b * sn, a * sn + b * cs)
        return FourierSeries(self.n, terms)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"omega": list(omega), "a": a, "b": b}
                for omega, (a, b) in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FourierSeries":
        return cls(int(d["n"]), {tuple(t["omega"]): (t["a"], t["b"]) for t in d["terms"]})

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "FourierSeries":
        return cls.from_dict(json.loads(text))


def eval_series(series: FourierSeries, phi) -> float:
    phi = np.asarray(phi, dtype=float).ravel()
    if phi.size != series.n:
        raise ValueError(f"expected a point of dimension {series.n}, got {phi.size}")
    if not series.terms:
        return 0.0
    omegas = np.array(list(series.terms), dtype=float)
    coef = np.array(list(series.terms.values()))
    t = omegas @ phi
    return float(coef[:, 0] @ np.sin(t) + coef[:, 1] @ np.cos(t))


def design_matrix(points: np.ndarray, half: list[tuple[int, ...]]) -> np.ndarray:
    """Columns: cos<w, phi> for every canonical w, then sin<w, phi> for w != 0."""
    omegas = np.array(half, dtype=float)
    t = points @ omegas.T
    return np.hstack([np.cos(t), np.sin(t[:, 1:])])


def sample_points(n: int, samples: int, strategy: str = "uniform", seed: int = 0) -> np.ndarray:
    """Sample locations in ``[0, 2 pi)^n``.

    ``"grid"`` returns the smallest regular ``m**n`` grid holding at least
    ``samples`` points, so it may return more than requested.
    """
    strategy = strategy.lower()
    if strategy in ("uniform", "uniformrandom", "uniform_random"):
        rng = np.random.default_rng(seed)
        return rng.uniform(0.0, 2 * np.pi, size=(samples, n))
    if strategy in ("grid", "regulargrid", "regular_grid"):
        m = max(1, math.ceil(samples ** (1.0 / n) - 1e-9)) if n else 1
        while m ** n < samples:
            m += 1
        axis = 2 * np.pi * np.arange(m) / m
        return np.array(list(itertools.product(axis, repeat=n)), dtype=float).reshape(-1, n)
    raise ValueError(f"unknown sampling strategy {strategy!r}")


def solve_coefficients(points, values, lattice: FrequencyLattice, rank_tol: float = 1e-10):
    """Least-squares coefficients for already-sampled values.

    Returns ``(series, residual_rms)``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    values = np.asarray(values, dtype=float).ravel()
    half = lattice.half()
    unknowns = 2 * len(half) - 1
    if points.shape[0] < unknowns:
        raise FourierFitError(
            f"{points.shape[0]} samples cannot determine {unknowns} coefficients; "
            f"need at least {unknowns}"
        )
    A = design_matrix(points, half)
    Q, R = np.linalg.qr(A)
    diag = np.abs(np.diag(R))
    if diag.min() <= rank_tol * max(diag.max(), 1.0):
        raise FourierFitError(
            "design matrix is rank deficient for these sample points; "
            "try the RegularGrid strategy or more samples"
        )
    coef = solve_triangular(R, Q.T @ values)
    residual = values - A @ coef
    rms = float(np.sqrt(np.mean(residual ** 2)))
    k = len(half)
    terms = {half[0]: (0.0, coef[0])}
    for i, omega in enumerate(half[1:], start=1):
        terms[omega] = (coef[k + i - 1], coef[i])
    return FourierSeries(lattice.n, terms), rms


def default_samples(lattice: FrequencyLattice) -> int:
    return 3 * lattice.unknowns


def fit(model: Callable, lattice: FrequencyLattice, samples: int | None = None,
        strategy: str = "uniform", seed: int = 0):
    """Sample ``model`` and fit the lattice-limited Fourier series.

    Returns ``(series, residual_rms, evaluations)``.
    """
    if samples is None:
        samples = default_samples(lattice)
    if samples < lattice.unknowns:
        raise FourierFitError(
            f"{samples} samples cannot determine {lattice.unknowns} coefficients; "
            f"need at least {lattice.unknowns}"
        )
    points = sample_points(lattice.n, samples, strategy, seed)
    values = np.array([model(p) for p in points], dtype=float)
    series, rms = solve_coefficients(points, values, lattice)
    return series, rms, len(points)


def prune(series: FourierSeries, threshold: float) -> FourierSeries:
    """Drop terms whose coefficients are both below ``threshold`` in magnitude."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    if threshold == 0:
        return FourierSeries(series.n, dict(series.terms))
    kept = {w: ab for w, ab in series.terms.items() if max(abs(ab[0]), abs(ab[1])) >= threshold}
    return FourierSeries(series.n, kept)
