from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specfp.errors import InputError
from specfp.fingerprint import (
    SubjectCentroids, default_lambda, fit_gmm, gmm_log_density, group_fingerprint,
    individual_fingerprint, mode_sigma_band,
)
from specfp.model import ClusterSettings, FrequencyAxis, KMode, SpectralMode


def _settings(k_mode=KMode.fixed(2), group=None, metric="euclidean", lam=None):
    return ClusterSettings(distance=metric, k_mode=k_mode, group_k_mode=group,
                           regularization_lambda=lam)


class TestIndividual:
    def test_identical_segments_k1(self):
        s = np.tile([1.0, 2.0, 0.5], (6, 1))
        fp = individual_fingerprint(s, _settings(KMode.fixed(1)), seed=0)
        np.testing.assert_array_equal(fp.centroids[0], s[0])
        assert fp.durations.tolist() == [100.0]

    def test_seventy_thirty(self, gen):
        a, b = np.array([1.0, 0.1, 0.1]), np.array([0.1, 0.1, 1.0])
        s = np.concatenate([a + 0.01 * gen.random((7, 3)), b + 0.01 * gen.random((3, 3))])
        for metric in ("euclidean", "cosine"):
            fp = individual_fingerprint(s, _settings(metric=metric), seed=4)
            assert sorted(fp.durations.tolist()) == [30.0, 70.0]

    def test_centroids_are_member_means_under_cosine(self, gen):
        s = gen.random((20, 4)) + 0.1
        fp = individual_fingerprint(s, _settings(metric="cosine"), seed=1)
        for j in range(2):
            np.testing.assert_allclose(fp.centroids[j], s[fp.assignment == j].mean(axis=0))

    def test_silhouette_mode_records_scores(self, gen):
        s = np.concatenate([gen.random((10, 3)), gen.random((10, 3)) + 5])
        fp = individual_fingerprint(s, _settings(KMode.silhouette(2, 4)), seed=0)
        assert len(fp.durations) == 2
        assert set(fp.silhouette_scores) == {2, 3, 4}

    def test_too_few_segments(self, gen):
        with pytest.raises(InputError) as e:
            individual_fingerprint(gen.random((2, 3)), _settings(KMode.silhouette(2, 4)), 0)
        assert e.value.code == "TooFewSegments"

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(5, 30), st.integers(1, 4))
    def test_durations_sum_to_100(self, seed, S, k):
        s = np.random.default_rng(seed).random((S, 4)) + 0.01
        fp = individual_fingerprint(s, _settings(KMode.fixed(k), metric="cosine"), seed)
        assert abs(fp.durations.sum() - 100.0) <= 1e-9


class TestGmm:
    def test_k1_closed_form(self, gen):
        x = gen.standard_normal((50, 3)) @ np.array([[1, 0.5, 0], [0, 1, 0.2], [0, 0, 2]])
        g = fit_gmm(x, 1, lam=0.01)
        np.testing.assert_allclose(g.means[0], x.mean(axis=0), atol=1e-12)
        cov = np.cov(x, rowvar=False, bias=True) + 0.01 * np.eye(3)
        np.testing.assert_allclose(g.covariances[0], cov, atol=1e-12)
        assert g.weights.tolist() == [1.0]

    def test_two_gaussians_recovered(self):
        g = np.random.default_rng(7)
        x = np.concatenate([0.5 * g.standard_normal((200, 2)), 10 + 0.5 * g.standard_normal((200, 2))])
        m = fit_gmm(x, 2, lam=1e-6, seed=3)
        order = np.argsort(m.means[:, 0])
        np.testing.assert_allclose(m.means[order], [[0, 0], [10, 10]], atol=0.2)
        np.testing.assert_allclose(m.weights, 0.5, atol=0.05)

    def test_default_lambda(self, gen):
        x = gen.standard_normal((40, 3)) * [1, 2, 3]
        assert default_lambda(x) == pytest.approx(1e-6 * x.var(axis=0).mean())
        assert default_lambda(np.ones((5, 3))) == 1e-10

    def test_errors(self, gen):
        with pytest.raises(InputError) as e:
            fit_gmm(gen.standard_normal((3, 2)), 4)
        assert e.value.code == "KTooLarge"
        with pytest.raises(InputError) as e:
            fit_gmm(np.ones((6, 2)), 1, lam=0.0)
        assert e.value.code == "SingularCovariance"

    def test_log_density_of_standard_normal(self):
        d = gmm_log_density(np.zeros((1, 2)), [np.zeros(2)], [np.eye(2)], [1.0])
        assert d[0] == pytest.approx(-np.log(2 * np.pi), abs=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4), st.integers(1, 4),
           st.sampled_from([1e-6, 1e-3, 0.1]))
    def test_em_invariants(self, seed, k, F, lam):
        g = np.random.default_rng(seed)
        x = np.concatenate([g.standard_normal((15, F)) + 3 * g.standard_normal(F) for _ in range(3)])
        m = fit_gmm(x, k, lam=lam, seed=seed, max_iter=100)
        h = np.array(m.log_likelihood_history)
        assert np.all(np.diff(h) >= -1e-9)
        assert abs(m.weights.sum() - 1.0) <= 1e-9
        for c in m.covariances:
            assert np.array_equal(c, c.T)
            assert np.linalg.eigvalsh(c).min() >= lam - 1e-12
        assert m.final_log_likelihood == h[-1]

    def test_deterministic(self, gen):
        x = gen.standard_normal((60, 3))
        a, b = fit_gmm(x, 3, seed=5), fit_gmm(x, 3, seed=5)
        assert a.means.tobytes() == b.means.tobytes()
        assert a.covariances.tobytes() == b.covariances.tobytes()


def _axis(freqs):
    return FrequencyAxis(np.asarray(freqs, dtype=float))


class TestGroup:
    def test_identical_centroids_k1(self):
        c = np.array([[0.5, 2.0, 1.0]])
        contrib = [SubjectCentroids(i, c, np.array([40.0 + i])) for i in range(6)]
        fp = group_fingerprint(3, contrib, _axis([8, 10, 12]), _settings(group=KMode.fixed(1)), 0)
        assert len(fp.modes) == 1
        m = fp.modes[0]
        np.testing.assert_allclose(m.mean, c[0], atol=1e-12)
        assert m.subject_support == 6
        assert m.duration_percent == pytest.approx(42.5)
        assert m.peak_frequency_hz == 10.0

    def test_peak_at_twelve_and_a_half(self, gen):
        axis = _axis([5.0, 7.5, 10.0, 12.5, 15.0])
        base = np.array([0.2, 0.4, 0.8, 1.5, 0.6])
        contrib = [SubjectCentroids(i, base + 0.01 * gen.random((1, 5)), np.array([100.0]))
                   for i in range(5)]
        fp = group_fingerprint(1, contrib, axis, _settings(group=KMode.fixed(1)), 0)
        assert fp.modes[0].peak_frequency_hz == 12.5

    def test_support_threshold_four_versus_five(self, gen):
        a, b = np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0])
        contrib = []
        for s in range(5):
            rows = [a + 0.01 * gen.random(3)]
            durs = [60.0]
            if s < 4:
                rows.append(b + 0.01 * gen.random(3))
                durs.append(40.0)
            contrib.append(SubjectCentroids(s, np.array(rows), np.array(durs)))
        fp = group_fingerprint(1, contrib, _axis([4, 8, 16]), _settings(group=KMode.fixed(2)), 0)
        by_peak = {m.peak_frequency_hz: m for m in fp.modes}
        assert by_peak[4.0].subject_support == 5
        assert by_peak[16.0].subject_support == 4
        flags = dict(zip([m.peak_frequency_hz for m in fp.modes], fp.support_flags(5)))
        assert flags == {4.0: True, 16.0: False}
        assert by_peak[4.0].duration_percent == 60.0
        assert by_peak[16.0].duration_percent == 40.0
        assert abs(fp.weights.sum() - 1) <= 1e-9

    def test_too_few_subjects(self):
        contrib = [SubjectCentroids(0, np.eye(3), np.full(3, 100 / 3))]
        with pytest.raises(InputError) as e:
            group_fingerprint(1, contrib, _axis([1, 2, 3]), _settings(group=KMode.fixed(1)), 0)
        assert e.value.code == "TooFewSubjects"

    def test_silhouette_group_k(self, gen):
        a, b = np.array([1.0, 0.1, 0.1]), np.array([0.1, 0.1, 1.0])
        contrib = [SubjectCentroids(s, np.stack([a + 0.01 * gen.random(3), b + 0.01 * gen.random(3)]),
                                    np.array([70.0, 30.0])) for s in range(6)]
        fp = group_fingerprint(1, contrib, _axis([4, 8, 16]),
                               _settings(group=KMode.silhouette(2, 5), metric="cosine"), 11)
        assert sorted(m.peak_frequency_hz for m in fp.modes) == [4.0, 16.0]
        assert all(m.subject_support == 6 for m in fp.modes)


class TestSigmaBand:
    def _mode(self, mean, cov):
        return SpectralMode(np.asarray(mean, float), np.asarray(cov, float), 1.0, 100.0, 1, 1.0)

    @staticmethod
    def _raw(mean, cov):
        # a validated SpectralMode must be positive definite; the band itself only needs PSD
        return SimpleNamespace(mean=np.asarray(mean, float), covariance=np.asarray(cov, float))

    def test_diag_four(self):
        up, lo = mode_sigma_band(self._mode([1.0, 2.0], 4 * np.eye(2)))
        np.testing.assert_array_equal(up, [3.0, 4.0])
        np.testing.assert_array_equal(lo, [-1.0, 0.0])

    def test_zero_covariance(self):
        up, lo = mode_sigma_band(self._raw([1.0, 2.0], np.zeros((2, 2))))
        np.testing.assert_array_equal(up, [1.0, 2.0])
        np.testing.assert_array_equal(lo, [1.0, 2.0])

    def test_random_spd(self, gen):
        a = gen.standard_normal((4, 4))
        cov = a @ a.T + 0.1 * np.eye(4)
        mean = gen.standard_normal(4)
        up, lo = mode_sigma_band(self._mode(mean, cov))
        half = np.sqrt(np.diag(cov))
        np.testing.assert_allclose(up - mean, half, atol=1e-12)
        np.testing.assert_allclose(mean - lo, half, atol=1e-12)

    def test_negative_diagonal(self):
        with pytest.raises(InputError) as e:
            mode_sigma_band(self._raw([0.0], [[-1.0]]))
        assert e.value.code == "NegativeDiagonal"
