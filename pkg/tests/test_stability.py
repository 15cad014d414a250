import numpy as np
import pytest

from qxai.cli import smooth_test_function
from qxai.stability import (
    CSV_COLUMNS, StabilityReport, ig_error_scan, memoized_shap_exact_variance, reports_to_csv, shap_error_scan,
)

f = smooth_test_function


def test_noiseless_scans_have_zero_variance():
    for r in ig_error_scan(f, np.ones(3), np.zeros(3), 0.0, [5, 10], R=30):
        assert np.all(r.empirical_var < 1e-20)
    for mode in ("memoized", "resampled"):
        for r in shap_error_scan(f, 1.0, 0.0, 0.0, [3], R=30, mode=mode):
            assert np.all(r.empirical_var < 1e-20)


def test_ig_variance_halves_per_mesh_doubling():
    reports = ig_error_scan(f, np.ones(4), np.zeros(4), 0.1, [10, 20, 40, 80], R=200, seed=1)
    for a, b in zip(reports, reports[1:]):
        assert 1.4 <= a.mean_empirical / b.mean_empirical <= 2.8


def test_ig_variance_matches_prediction():
    (r,) = ig_error_scan(f, np.ones(3), np.zeros(3), 0.1, [50], R=500, seed=2)
    assert 0.7 <= r.ratio <= 1.4
    lo, hi = r.confidence_band()
    assert lo <= r.mean_predicted <= hi


def test_resampling_beats_memoization():
    (mem,) = shap_error_scan(f, 1.0, 0.0, 0.1, [4], R=500, mode="memoized", seed=3)
    (res,) = shap_error_scan(f, 1.0, 0.0, 0.1, [4], R=500, mode="resampled", seed=3)
    assert res.mean_empirical < mem.mean_empirical


@pytest.mark.parametrize("n", [4, 8])
def test_memoized_variance_near_sigma_squared_over_n(n):
    (r,) = shap_error_scan(f, 1.0, 0.0, 0.1, [n], R=500, seed=4)
    assert 1 / 3 <= r.ratio <= 3
    # the exact finite-n value is tighter still
    assert r.mean_empirical == pytest.approx(memoized_shap_exact_variance(n, 0.1), rel=0.25)


def test_inactive_features_are_left_out_of_the_summary():
    (r,) = ig_error_scan(f, np.array([1.0, 0.0]), np.zeros(2), 0.1, [10], R=30)
    assert r.active.tolist() == [True, False]
    assert r.empirical_var[1] == 0.0
    assert r.mean_predicted == r.predicted_var[0]


def test_seed_reproducible():
    a = shap_error_scan(f, 1.0, 0.0, 0.1, [3], R=40, seed=9)[0]
    b = shap_error_scan(f, 1.0, 0.0, 0.1, [3], R=40, seed=9)[0]
    assert np.array_equal(a.empirical_var, b.empirical_var)
    a = ig_error_scan(f, np.ones(2), np.zeros(2), 0.1, [5], R=40, seed=9)[0]
    b = ig_error_scan(f, np.ones(2), np.zeros(2), 0.1, [5], R=40, seed=9)[0]
    assert np.array_equal(a.empirical_var, b.empirical_var)


def test_argument_checks():
    with pytest.raises(ValueError):
        ig_error_scan(f, [1.0], [0.0], 0.1, [5], R=29)
    with pytest.raises(ValueError):
        ig_error_scan(f, [1.0], [0.0], -0.1, [5], R=30)
    with pytest.raises(ValueError):
        shap_error_scan(f, 1.0, 0.0, 0.1, [13], R=30)
    with pytest.raises(ValueError):
        shap_error_scan(f, 1.0, 0.0, 0.1, [3], R=30, mode="cached")


def test_csv():
    r = StabilityReport("ig", 0.1, 10, 30, np.array([2e-3, 4e-3]), np.array([3e-3, 3e-3]))
    text = reports_to_csv([r], preamble=["hello"])
    lines = text.splitlines()
    assert lines[0] == "# hello"
    assert lines[1] == ",".join(CSV_COLUMNS)
    row = lines[2].split(",")
    assert row[:3] == ["ig", "0.1", "10"]
    assert float(row[5]) == pytest.approx(1.0)
    assert float(row[6]) < 3e-3 < float(row[7])
