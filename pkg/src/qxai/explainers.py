"""Attribution methods for black-box models ``f: R^n -> R``.

* :func:`integrated_gradients` - trapezoid rule along ``b -> x`` with central
  finite differences, end nodes dropped.
* :func:`baseline_shap_exact` - powerset form, one evaluation per distinct
  corner of the box spanned by ``x`` and ``b``.
* :func:`permutation_shap` - average marginal contribution over permutations,
  optionally re-evaluating every point (fresh noise) per permutation.
* :func:`qshap` - sample, fit a Fourier series, expand to a rank-one
  polynomial, then apply :func:`~qxai.polytensor.polynomial_shap`.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Sequence

import numpy as np

from .fourier import FrequencyLattice, fit, prune
from .polytensor import ExpansionConfig, OpCounter, box_radius, expand_series, polynomial_shap
from .result import AttributionResult

EXACT_SHAP_MAX_FEATURES = 20
DEFAULT_MESH = 20


def _pair(x, b):
    x = np.asarray(x, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if x.shape != b.shape:
        raise ValueError(f"input has dimension {x.size} but baseline has {b.size}")
    return x, b


def default_delta(x, b) -> np.ndarray:
    return 1e-3 * np.maximum(1.0, np.abs(np.asarray(x, float) - np.asarray(b, float)))


def integrated_gradients(f: Callable, x, b, mesh_N: int = DEFAULT_MESH, delta=None) -> AttributionResult:
    """Integrated Gradients with finite-difference partials.

    ``IG(e) = (x_e - b_e) / (2 N delta_e) * sum_{i=1}^{N-1} [f(g_i + delta_e e) - f(g_i - delta_e e)]``
    with ``g_i = (i/N) x + (1 - i/N) b``. The two end nodes of the trapezoid
    rule are dropped, so the completeness gap shrinks like ``1/N``. Uses
    ``2 (N-1) n`` evaluations.
    """
    x, b = _pair(x, b)
    if mesh_N < 2:
        raise ValueError("mesh_N must be >= 2")
    n = x.size
    delta = default_delta(x, b) if delta is None else np.broadcast_to(np.asarray(delta, float), (n,)).copy()
    if np.any(delta <= 0):
        raise ValueError("finite-difference steps must be > 0")
    values = np.zeros(n)
    for e in range(n):
        total = 0.0
        for i in range(1, mesh_N):
            g = (i / mesh_N) * x + (1 - i / mesh_N) * b
            up, down = g.copy(), g.copy()
            up[e] += delta[e]
            down[e] -= delta[e]
            total += f(up) - f(down)
        values[e] = (x[e] - b[e]) / (2 * mesh_N * delta[e]) * total
    return AttributionResult(
        values, "ig", 2 * (mesh_N - 1) * n,
        metadata={"mesh": mesh_N, "delta": delta.tolist()},
    )


def shapley_weights(n: int) -> np.ndarray:
    """``w[s] = s! (n-1-s)! / n!`` for coalitions of size ``s`` not containing the feature."""
    return np.array([math.factorial(s) * math.factorial(n - 1 - s) / math.factorial(n) for s in range(n)])


def baseline_shap_exact(f: Callable, x, b) -> AttributionResult:
    """Exact Baseline SHAP over the powerset of features.

    Features with ``x_e == b_e`` do not move the evaluation point, so only the
    ``2**k`` distinct corners (``k`` = number of differing features) are
    evaluated, each once. Such features get exactly zero.
    """
    x, b = _pair(x, b)
    n = x.size
    if n > EXACT_SHAP_MAX_FEATURES:
        raise ValueError(
            f"exact Baseline SHAP needs 2**{n} evaluations; "
            f"use permutation_shap for more than {EXACT_SHAP_MAX_FEATURES} features"
        )
    active = np.flatnonzero(x != b)
    k = active.size
    values = np.zeros(n)
    if k == 0:
        return AttributionResult(values, "bs", 0)
    masks = np.arange(2 ** k)
    bits = (masks[:, None] >> np.arange(k)[None, :]) & 1
    corner_values = np.empty(2 ** k)
    for m in masks:
        z = b.copy()
        z[active] = np.where(bits[m] == 1, x[active], b[active])
        corner_values[m] = f(z)
    # sizes of coalitions among all n features: inactive features never matter
    # for the marginal, and summing the full-n weights over them collapses to
    # the k-feature weights
    w = shapley_weights(k)
    size = bits.sum(axis=1)
    for j, e in enumerate(active):
        without = masks[bits[:, j] == 0]
        diff = corner_values[without | (1 << j)] - corner_values[without]
        values[e] = float(np.sum(w[size[without]] * diff))
    return AttributionResult(values, "bs", 2 ** k)


def permutation_shap(f: Callable, x, b, permutations: int | None = None, seed: int = 0,
                     resample_per_permutation: bool = False) -> AttributionResult:
    """Baseline SHAP as an average over feature orderings.

    ``permutations=None`` enumerates all ``n!`` orderings; otherwise that many
    are drawn uniformly. With ``resample_per_permutation`` every ordering walks
    its own ``n + 1`` points and evaluates each afresh; otherwise evaluations
    are cached by coalition.
    """
    x, b = _pair(x, b)
    n = x.size
    if permutations is None:
        orders: Sequence = list(itertools.permutations(range(n)))
    else:
        if permutations < 1:
            raise ValueError("need at least one permutation")
        rng = np.random.default_rng(seed)
        orders = [rng.permutation(n) for _ in range(permutations)]
    cache: dict[int, float] = {}
    evals = 0

    def value(mask: int) -> float:
        nonlocal evals
        if not resample_per_permutation and mask in cache:
            return cache[mask]
        idx = [i for i in range(n) if mask >> i & 1]
        z = b.copy()
        z[idx] = x[idx]
        v = f(z)
        evals += 1
        cache[mask] = v
        return v

    totals = np.zeros(n)
    for order in orders:
        mask = 0
        prev = value(mask)
        for e in order:
            mask |= 1 << int(e)
            cur = value(mask)
            totals[e] += cur - prev
            prev = cur
    return AttributionResult(
        totals / len(orders), "perm", evals, seed=seed,
        metadata={"permutations": len(orders), "resampled": bool(resample_per_permutation)},
    )


def qshap(model: Callable, frequency_bounds: Sequence[int], x, b, samples: int = 250,
          expansion: ExpansionConfig | None = None, seed: int = 0, prune_threshold: float = 0.0,
          strategy: str = "uniform", counter: OpCounter | None = None) -> AttributionResult:
    """SHAP values for a model with a lattice-limited Fourier spectrum.

    ``frequency_bounds[i]`` is the number of times input ``i`` is encoded
    (0 for inputs the model ignores). The model is sampled ``samples`` times
    over ``[0, 2 pi)^n`` independently of ``x`` and ``b``; the fitted series is
    expanded around the midpoint of ``x`` and ``b`` and explained in closed
    form. The fit residual is reported as ``residual_rms``.
    """
    x, b = _pair(x, b)
    if len(frequency_bounds) != x.size:
        raise ValueError("need one frequency bound per input")
    expansion = expansion or ExpansionConfig()
    lattice = FrequencyLattice(tuple(frequency_bounds))
    series, rms, evals = fit(model, lattice, samples, strategy=strategy, seed=seed)
    if prune_threshold > 0:
        series = prune(series, prune_threshold)
    center = (x + b) / 2
    if expansion.scheme == "chebyshev" and expansion.domain_radius is None:
        radius = max(box_radius(series, x, b), 1e-6)
        expansion = ExpansionConfig("chebyshev", expansion.order, radius)
    poly = expand_series(series, expansion, center=center)
    counter = counter if counter is not None else OpCounter()
    sh = polynomial_shap(poly, x, b, counter=counter)
    return AttributionResult(
        sh.values, "qshap", evals, seed=seed,
        metadata={
            "residual_rms": rms,
            "samples": evals,
            "fourier_terms": len(series),
            "scheme": expansion.scheme,
            "order": expansion.order,
            "domain_radius": expansion.domain_radius,
            "polynomial_ops": counter.ops,
        },
    )
