"""Monte-Carlo checks of how explainer error scales with evaluation noise.

Noise is additive Gaussian on the model output, so the predicted variances
are exact functions of ``sigma`` and can be compared directly:

* IG with mesh ``N``: ``((x_e - b_e) / (2 N delta_e))**2 * 2 (N-1) sigma**2``,
  which decays like ``sigma**2 / N``.
* Exact BS, memoized corners: asymptotically ``sigma**2 / n``.
* BS over all permutations with fresh evaluations: ``2 sigma**2 / n!``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .explainers import baseline_shap_exact, default_delta, integrated_gradients, permutation_shap

MIN_REPLICATIONS = 30
CSV_COLUMNS = ("method", "sigma", "N_or_n", "empirical_var", "predicted_var", "ratio", "ci_lo", "ci_hi")


@dataclass
class StabilityReport:
    method: str
    sigma: float
    size: int  # mesh N for IG, feature count n for SHAP
    replications: int
    empirical_var: np.ndarray  # per feature
    predicted_var: np.ndarray  # per feature
    active: np.ndarray = field(default=None)  # features entering the summary row

    def __post_init__(self):
        if self.active is None:
            self.active = np.ones(len(self.empirical_var), dtype=bool)

    @property
    def mean_empirical(self) -> float:
        return float(np.mean(self.empirical_var[self.active])) if self.active.any() else 0.0

    @property
    def mean_predicted(self) -> float:
        return float(np.mean(self.predicted_var[self.active])) if self.active.any() else 0.0

    @property
    def ratio(self) -> float:
        p = self.mean_predicted
        return self.mean_empirical / p if p > 0 else float("nan")

    def confidence_band(self, level: float = 0.95) -> tuple[float, float]:
        """Chi-square interval for the variance with ``R - 1`` degrees of freedom."""
        dof = self.replications - 1
        s2 = self.mean_empirical
        a = (1 - level) / 2
        return dof * s2 / stats.chi2.ppf(1 - a, dof), dof * s2 / stats.chi2.ppf(a, dof)

    def row(self) -> dict:
        lo, hi = self.confidence_band()
        return {
            "method": self.method,
            "sigma": self.sigma,
            "N_or_n": self.size,
            "empirical_var": self.mean_empirical,
            "predicted_var": self.mean_predicted,
            "ratio": self.ratio,
            "ci_lo": lo,
            "ci_hi": hi,
        }


def reports_to_csv(reports: Sequence[StabilityReport], preamble: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in preamble:
        buf.write(f"# {line}\n")
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in r.row().items()})
    return buf.getvalue()


class NoisyFunction:
    """``f`` plus fresh ``N(0, sigma^2)`` noise on every call."""

    def __init__(self, f: Callable, sigma: float, rng: np.random.Generator):
        self.f, self.sigma, self.rng = f, float(sigma), rng

    def __call__(self, z) -> float:
        v = self.f(z)
        if self.sigma > 0:
            v += self.sigma * self.rng.standard_normal()
        return v


def _check_reps(R):
    if R < MIN_REPLICATIONS:
        raise ValueError(f"need at least {MIN_REPLICATIONS} replications, got {R}")


def ig_predicted_variance(x, b, N, delta, sigma) -> np.ndarray:
    x, b = np.asarray(x, float), np.asarray(b, float)
    return ((x - b) / (2 * N * delta)) ** 2 * 2 * (N - 1) * sigma ** 2


def ig_error_scan(f_true: Callable, x, b, sigma: float, mesh_Ns: Sequence[int], R: int = 200,
                  seed: int = 0, delta=None) -> list[StabilityReport]:
    """Variance of IG attributions under output noise, one report per mesh size."""
    _check_reps(R)
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    x = np.asarray(x, float).ravel()
    b = np.asarray(b, float).ravel()
    delta = default_delta(x, b) if delta is None else np.broadcast_to(np.asarray(delta, float), x.shape)
    reports = []
    for N in mesh_Ns:
        clean = integrated_gradients(f_true, x, b, N, delta).values
        draws = np.empty((R, x.size))
        for r in range(R):
            noisy = NoisyFunction(f_true, sigma, np.random.default_rng([seed, N, r]))
            draws[r] = integrated_gradients(noisy, x, b, N, delta).values - clean
        reports.append(StabilityReport(
            "ig", sigma, int(N), R,
            draws.var(axis=0, ddof=1),
            ig_predicted_variance(x, b, N, delta, sigma),
            active=x != b,
        ))
    return reports


def _broadcast(v, n):
    v = np.asarray(v, float).ravel()
    if v.size == 1:
        return np.full(n, v.item())
    if v.size < n:
        raise ValueError(f"need at least {n} coordinates, got {v.size}")
    return v[:n]


def shap_error_scan(f_true: Callable, x, b, sigma: float, n_features_list: Sequence[int] | None = None,
                    R: int = 200, mode: str = "memoized", seed: int = 0) -> list[StabilityReport]:
    """Variance of Baseline SHAP under output noise.

    ``mode="memoized"`` uses the powerset form (each corner evaluated once);
    ``mode="resampled"`` averages over all ``n!`` permutations, evaluating
    every point afresh in each. ``x`` and ``b`` may be scalars, or vectors of
    at least ``max(n_features_list)`` entries that are truncated per ``n``;
    ``f_true`` must accept any of those lengths.
    """
    _check_reps(R)
    if mode not in ("memoized", "resampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if n_features_list is None:
        n_features_list = [np.asarray(x).size]
    reports = []
    for n in n_features_list:
        if n > 12:
            raise ValueError("shap_error_scan supports at most 12 features")
        xn, bn = _broadcast(x, n), _broadcast(b, n)
        clean = baseline_shap_exact(f_true, xn, bn).values
        draws = np.empty((R, n))
        for r in range(R):
            noisy = NoisyFunction(f_true, sigma, np.random.default_rng([seed, n, r]))
            if mode == "memoized":
                est = baseline_shap_exact(noisy, xn, bn)
            else:
                est = permutation_shap(noisy, xn, bn, permutations=None, resample_per_permutation=True)
            draws[r] = est.values - clean
        if mode == "memoized":
            predicted = np.full(n, sigma ** 2 / n)
        else:
            predicted = np.full(n, 2 * sigma ** 2 / math.factorial(n))
        reports.append(StabilityReport(
            f"bs-{mode}", sigma, int(n), R, draws.var(axis=0, ddof=1), predicted, active=xn != bn,
        ))
    return reports


def memoized_shap_exact_variance(n: int, sigma: float) -> float:
    """Exact noise variance of memoized BS when all ``n`` features differ."""
    w = np.array([math.factorial(s) * math.factorial(n - 1 - s) / math.factorial(n) for s in range(n)])
    counts = np.array([math.comb(n - 1, s) for s in range(n)])
    return float(2 * sigma ** 2 * np.sum(counts * w ** 2))
