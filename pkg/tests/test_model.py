import numpy as np
import pytest

from specfp.errors import InvariantViolation
from specfp.model import (
    ConfusionMatrix, Dendrogram, Fingerprint, FrequencyAxis, GmmModel, KMode, Parcellation,
    Recording, Roi, SegmentSet, SpatialFilter, SpectralMode,
)


def _mode(mean, weight=1.0, peak=1.0):
    return SpectralMode(np.asarray(mean, float), np.eye(len(mean)), weight, 50.0, 3, peak)


@pytest.mark.parametrize("make, invariant", [
    (lambda: Recording("s", 0.0, np.zeros((1, 4))), "sample_rate_hz > 0"),
    (lambda: Recording("s", 10.0, np.zeros((1, 0))), "T >= 1"),
    (lambda: Recording("s", 10.0, np.array([[0.0, np.nan]])), "no NaN/Inf entries"),
    (lambda: SpatialFilter("s", (0, 0), np.zeros((2, 3))), "voxel_ids distinct and non-negative"),
    (lambda: SpatialFilter("s", (0, 1), np.zeros((3, 3))), "row count equals voxel_ids length"),
    (lambda: Parcellation("p", (Roi(1, "a", (0,)), Roi(1, "b", (1,)))), "roi_ids unique"),
    (lambda: Parcellation("p", (Roi(1, "a", ()),)), "every voxel list non-empty"),
    (lambda: Parcellation("p", (Roi(1, "a", (0, 1)), Roi(2, "b", (1,)))),
     "a voxel may appear in at most one ROI"),
    (lambda: FrequencyAxis(np.array([1.0])), "F >= 2"),
    (lambda: FrequencyAxis(np.array([2.0, 1.0])), "strictly increasing"),
    (lambda: ConfusionMatrix((1, 2), np.array([[1, 0], [1, 1]]), 1), "every row sums to n_iterations"),
    (lambda: Dendrogram((0, 1, 2), ((0, 1, 2.0), (2, 3, 1.0))), "heights non-decreasing"),
    (lambda: Dendrogram((0, 1, 2), ((0, 1, 1.0), (0, 3, 2.0))), "every node merged exactly once"),
    (lambda: KMode.silhouette(1, 3), "k_min >= 2 when silhouette mode"),
])
def test_invariant_violations_are_named(make, invariant):
    with pytest.raises(InvariantViolation) as e:
        make()
    assert e.value.invariant == invariant


def test_segment_set_requires_matching_length():
    with pytest.raises(InvariantViolation):
        SegmentSet("s", 4, np.zeros((2, 1, 3)))


def test_spectral_mode_checks():
    with pytest.raises(InvariantViolation, match="positive definite"):
        SpectralMode(np.zeros(2), np.zeros((2, 2)), 1.0, 10.0, 1, 1.0)
    with pytest.raises(InvariantViolation, match="weight"):
        _mode([1.0, 2.0], weight=0.0)
    m = SpectralMode(np.zeros(2), np.diag([4.0, 9.0]), 1.0, 10.0, 1, 1.0)
    np.testing.assert_array_equal(m.sigma, [2.0, 3.0])


def test_fingerprint_weights_and_peak_membership():
    axis = FrequencyAxis(np.array([1.0, 2.0]))
    Fingerprint(1, (_mode([1, 2], 0.25, 2.0), _mode([2, 1], 0.75, 1.0)), axis)
    with pytest.raises(InvariantViolation, match="weights sum to 1"):
        Fingerprint(1, (_mode([1, 2], 0.5, 2.0), _mode([2, 1], 0.4, 1.0)), axis)
    with pytest.raises(InvariantViolation, match="peak_frequency_hz"):
        Fingerprint(1, (_mode([1, 2], 1.0, 3.0),), axis)


def test_gmm_model_weights():
    with pytest.raises(InvariantViolation):
        GmmModel(np.zeros((1, 2)), np.eye(2)[None], np.array([0.9]), 0.0, 0.0)


def test_arrays_are_read_only():
    rec = Recording("s", 10.0, np.zeros((2, 3)))
    with pytest.raises(ValueError):
        rec.samples[0, 0] = 1.0


def test_axis_equality_and_nyquist_check():
    a = FrequencyAxis(np.array([1.0, 2.0]))
    assert a == FrequencyAxis(np.array([1.0, 2.0]))
    assert a != FrequencyAxis(np.array([1.0, 3.0]))
    with pytest.raises(InvariantViolation):
        a.validate(sample_rate_hz=4.0)
