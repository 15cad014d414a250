"""
Fitting a circuit's Fourier series
==================================

A classifier that encodes each pixel once is a trigonometric polynomial of
degree one in every input. A few hundred evaluations pin down all of its
coefficients.
"""

import numpy as np

from qxai.classifier import load_reference_model
from qxai.circuit import NoiseSpec
from qxai.fourier import FrequencyLattice, eval_series, fit, prune

# the single-qubit model reads pixels 0 and 1
model = load_reference_model("single-qubit")
f = model.evaluator()
print("frequency bounds per pixel:", model.frequency_bounds)

lattice = FrequencyLattice((1, 1))
print("lattice size", lattice.size, "->", len(lattice.half()), "canonical terms")

g = lambda p: f([p[0], p[1], 0, 0])
series, rms, evals = fit(g, lattice, samples=250, seed=0)
print(f"\nfit from {evals} evaluations, residual rms {rms:.1e}")
for w in lattice.half():
    a, b = series.coefficient(w)
    print(f"  omega={w}:  a={a:+.4f}  b={b:+.4f}")

# held-out check
pts = np.random.default_rng(1).uniform(0, 2 * np.pi, (100, 2))
print("max held-out error:", max(abs(eval_series(series, p) - g(p)) for p in pts))

# %%
# With 1000 shots per evaluation the small coefficients drown in noise.
# Pruning at three standard errors of a single shot average keeps the ones
# that matter.
noisy = model.evaluator(NoiseSpec(shots=1000, seed=3))
nseries, nrms, _ = fit(lambda p: noisy([p[0], p[1], 0, 0]), lattice, samples=250, seed=0)
print(f"\nshot-noise fit residual rms {nrms:.3f}")
print("support before pruning:", sorted(nseries.support()))
print("support after pruning :", sorted(prune(nseries, 3 / np.sqrt(1000)).support()))
