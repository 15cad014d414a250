"""
Attributions under shot and gate noise
======================================

Repeat each explanation over 20 noise seeds and look at the spread. IG
divides every shot average by a tiny finite-difference step, so it suffers
most. BS and qSHAP both stay within about a hundredth of the noiseless
values.
"""

import math

import numpy as np

from qxai.circuit import NoiseSpec
from qxai.classifier import load_reference_model
from qxai.cli import explain_one

# two-qubit model, so depolarizing noise on its CNOTs has something to act on
model = load_reference_model("two-qubit")
image, black = [1, 0, 1, 0], [0, 0, 0, 0]
clean = {m: explain_one(model, m, image, black, NoiseSpec()).values for m in ("ig", "bs", "qshap")}

for label, spec in [("shots=1000", dict(shots=1000)),
                    ("shots=1000 + 2% depolarizing", dict(shots=1000, depolarizing_p=0.02)),
                    ("shots=200", dict(shots=200))]:
    print(f"\n{label}")
    for method in clean:
        runs = np.array([explain_one(model, method, image, black, NoiseSpec(seed=s, **spec), seed=s).values
                         for s in range(20)])
        print(f"  {method:5s} mean {np.round(runs.mean(0)[:2], 3)}  std {np.round(runs.std(0)[:2], 4)}"
              f"  noiseless {np.round(clean[method][:2], 3)}")

# qSHAP prunes Fourier terms below 3/sqrt(shots) by default once shots are set
print("\ndefault pruning threshold at 1000 shots:", round(3 / math.sqrt(1000), 4))
