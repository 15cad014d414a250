"""
Explaining the bars-and-stripes classifiers
===========================================

Integrated Gradients, exact Baseline SHAP and qSHAP on the three shipped
models, all against a black baseline image. The smaller circuits never read
the bottom row, so every method should leave it at zero.
"""

import numpy as np

from qxai.circuit import NoiseSpec
from qxai.classifier import CIRCUIT_KINDS, dataset, load_reference_model
from qxai.cli import explain_one

np.set_printoptions(precision=3, suppress=True)

for kind in CIRCUIT_KINDS:
    model = load_reference_model(kind)
    print(f"\n== {kind}  (pixels read: {model.pixels}, accuracy {model.accuracy():.0%})")
    for i, img in enumerate(dataset()):
        print(f"image {i} {img.pixels} {img.label}: prediction {model.predict(img.pixels):+.3f}")
        for method in ("ig", "bs", "qshap"):
            res = explain_one(model, method, img.pixels, [0, 0, 0, 0], NoiseSpec(), samples=300)
            print(f"   {method:5s} {res.values}   ({res.evaluations} evaluations)")

# the four-qubit model puts its weight on the lower pixels, next to the
# measured qubit
