"""
How explainer error scales with evaluation noise
================================================

Gaussian noise of width sigma on every model call. For IG the attribution
variance falls like 1/N in the mesh size; for exact BS it depends on whether
each corner value is reused (memoized) or drawn afresh per permutation.
"""

import numpy as np

from qxai.cli import smooth_test_function as f
from qxai.stability import ig_error_scan, memoized_shap_exact_variance, shap_error_scan

sigma = 0.1
print("IG, 4 features, x = 1, b = 0")
print("   N   empirical   predicted   ratio   95% band")
for r in ig_error_scan(f, np.ones(4), np.zeros(4), sigma, [10, 20, 40, 80, 160], R=300, seed=0):
    lo, hi = r.confidence_band()
    print(f"{r.size:4d}   {r.mean_empirical:.3e}   {r.mean_predicted:.3e}   {r.ratio:.2f}   [{lo:.2e}, {hi:.2e}]")

print("\nexact BS")
print("   n   memoized    exact finite-n   sigma^2/n   resampled   2 sigma^2/n!")
for n in (2, 3, 4, 5, 6):
    (mem,) = shap_error_scan(f, 1.0, 0.0, sigma, [n], R=300, seed=1)
    (res,) = shap_error_scan(f, 1.0, 0.0, sigma, [n], R=300, mode="resampled", seed=1)
    print(f"{n:4d}   {mem.mean_empirical:.2e}    {memoized_shap_exact_variance(n, sigma):.2e}"
          f"         {sigma ** 2 / n:.2e}    {res.mean_empirical:.2e}    {res.mean_predicted:.2e}")
