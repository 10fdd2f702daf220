import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specfp.errors import InputError
from specfp.model import FrequencyAxis, Recording, SegmentSpectrum
from specfp.spectra import (
    full_power, make_frequency_axis, normalize_spectra, segment_power_spectrum, segment_signal,
)

from conftest import dft_power


def _rec(T, fs=256.0, C=2, seed=0):
    return Recording("s", fs, np.random.default_rng(seed).standard_normal((C, T)))


class TestSegmentation:
    def test_three_minutes_of_one_second_segments(self):
        seg = segment_signal(_rec(180 * 256), 1000)
        assert seg.n_segments == 180
        assert seg.segment_length_samples == 256

    def test_exact_length_gives_one_segment(self):
        assert segment_signal(_rec(256), 1000).n_segments == 1

    def test_partial_tail_discarded(self):
        rec = _rec(640)  # 2.5 L
        seg = segment_signal(rec, 1000)
        assert seg.n_segments == 2
        np.testing.assert_array_equal(
            np.concatenate(list(seg.segments), axis=1), rec.samples[:, :512])

    def test_segment_s_covers_expected_samples(self):
        rec = _rec(1000, fs=100.0)
        seg = segment_signal(rec, 100)  # L = 10
        np.testing.assert_array_equal(seg.segments[7], rec.samples[:, 70:80])

    def test_errors(self):
        with pytest.raises(InputError) as e:
            segment_signal(_rec(100, fs=100.0), 10)  # L = 1
        assert e.value.code == "SegmentTooShort"
        with pytest.raises(InputError) as e:
            segment_signal(_rec(100), 1000)
        assert e.value.code == "RecordingTooShort"


class TestFrequencyAxis:
    def test_linear_endpoints(self):
        ax = make_frequency_axis(1, 40, 2, "linear", 256, 256, snap=False)
        np.testing.assert_array_equal(ax.frequencies_hz, [1, 40])

    def test_log_midpoint(self):
        ax = make_frequency_axis(1, 100, 3, "logarithmic", 1000, 1000, snap=False)
        np.testing.assert_allclose(ax.frequencies_hz, [1, 10, 100], rtol=1e-12)

    def test_snapping_to_integer_bins(self):
        ax = make_frequency_axis(1, 40, 30, "logarithmic", 256, 256, snap=True)
        f = ax.frequencies_hz
        # oracle: nearest bin of each unsnapped log-spaced value, de-duplicated
        raw = np.exp(np.linspace(np.log(1), np.log(40), 30))
        expected = sorted({int(np.floor(v + 0.5)) for v in raw})
        np.testing.assert_array_equal(f, expected)
        assert np.all(f == np.round(f)) and ax.bin_snapped
        assert f[0] == 1 and f[-1] == 40 and len(f) < 30

    def test_nyquist_violation(self):
        with pytest.raises(InputError) as e:
            make_frequency_axis(1, 128, 10, "linear", 256, 256)
        assert e.value.code == "NyquistViolation"

    def test_degenerate_after_snapping(self):
        with pytest.raises(InputError) as e:
            make_frequency_axis(1.0, 1.2, 5, "linear", 256, 256)
        assert e.value.code == "DegenerateAxis"


FS, L = 256.0, 256
AXIS = make_frequency_axis(1, 40, 40, "linear", FS, L)
t = np.arange(L) / FS


class TestPower:
    def test_unit_sine_power_half(self):
        x = np.sin(2 * np.pi * 10 * t)
        p = segment_power_spectrum(x, AXIS, "rectangular", FS)
        i = list(AXIS.frequencies_hz).index(10.0)
        assert p[i] == pytest.approx(0.5, abs=1e-9)
        assert dft_power(x, 10) == pytest.approx(0.5, abs=1e-9)

    def test_zero_segment(self):
        np.testing.assert_array_equal(segment_power_spectrum(np.zeros(L), AXIS, "hann", FS), 0.0)

    def test_two_sines(self):
        x = np.sin(2 * np.pi * 10 * t) + np.sin(2 * np.pi * 20 * t + 0.3)
        p = segment_power_spectrum(x, AXIS, "rectangular", FS)
        oracle = np.array([dft_power(x, int(f)) for f in AXIS.frequencies_hz])
        np.testing.assert_allclose(p, oracle, atol=1e-9)
        f = AXIS.frequencies_hz
        np.testing.assert_allclose(p[(f == 10) | (f == 20)], 0.5, atol=1e-9)
        assert np.all(p[(f != 10) & (f != 20)] < 1e-9)

    def test_matches_direct_dft_for_random_segment(self, gen):
        x = gen.standard_normal(64)
        ax = make_frequency_axis(4, 28, 7, "linear", 64.0, 64)
        p = segment_power_spectrum(x, ax, "rectangular", 64.0)
        np.testing.assert_allclose(p, [dft_power(x, int(f)) for f in ax.frequencies_hz], rtol=1e-10)

    def test_hann_uses_mean_square_normalisation(self, gen):
        x = gen.standard_normal(L)
        w = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(L) / L)
        p = segment_power_spectrum(x, AXIS, "hann", FS)
        xw = x * w
        W = np.mean(w ** 2)
        oracle = [dft_power(xw, int(f)) / W for f in AXIS.frequencies_hz[:5]]
        np.testing.assert_allclose(p[:5], oracle, rtol=1e-10)

    def test_interpolation_between_bins(self, gen):
        x = gen.standard_normal(L)
        ax = FrequencyAxis(np.array([10.0, 10.25, 11.0]))
        p = segment_power_spectrum(x, ax, "rectangular", FS)
        full = full_power(x, FS)
        assert p[1] == pytest.approx(0.75 * full[10] + 0.25 * full[11], rel=1e-12)

    @pytest.mark.parametrize("n", [L, L - 1])
    def test_parseval(self, gen, n):
        x = gen.standard_normal(n)
        p = full_power(x, FS)
        # undo the one-sided scaling: |X_k|^2 = P_k n^2 / 2, mirrored bins counted twice
        mirrored = p[1:-1] if n % 2 == 0 else p[1:]
        two_sided = (p[0] + 2 * mirrored.sum() + (p[-1] if n % 2 == 0 else 0.0)) * n * n / 2
        assert abs(two_sided / n - np.sum(x ** 2)) <= 1e-9 * np.sum(x ** 2)

    def test_nan_rejected(self):
        x = np.zeros(L)
        x[3] = np.nan
        with pytest.raises(InputError) as e:
            segment_power_spectrum(x, AXIS, "hann", FS)
        assert e.value.code == "NanInput"

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.01, 100.0), st.integers(0, 2 ** 32 - 1))
    def test_homogeneous_degree_two(self, c, seed):
        x = np.random.default_rng(seed).standard_normal(L)
        p1 = segment_power_spectrum(x, AXIS, "hann", FS)
        p2 = segment_power_spectrum(c * x, AXIS, "hann", FS)
        np.testing.assert_allclose(p2, c * c * p1, rtol=1e-9, atol=1e-300)


class TestNormalization:
    def test_identical_spectra_become_one(self):
        row = np.abs(np.random.default_rng(1).standard_normal(4)) + 0.1
        s = np.tile(row, (5, 1))
        out = normalize_spectra({1: s, 2: s.copy(), 3: s.copy()})
        for v in out.values():
            np.testing.assert_allclose(v, 1.0, rtol=1e-12)

    def test_constant_two_and_four(self):
        out = normalize_spectra({1: np.full((3, 4), 2.0), 2: np.full((3, 4), 4.0)})
        np.testing.assert_allclose(out[1], 2 / 3)
        np.testing.assert_allclose(out[2], 4 / 3)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 6), st.integers(1, 10), st.integers(0, 2 ** 32 - 1))
    def test_roi_mean_is_one(self, R, S, seed):
        g = np.random.default_rng(seed)
        spectra = {r: g.uniform(0.01, 5.0, size=(S + r, 6)) for r in range(R)}
        out = normalize_spectra(spectra)
        mean = np.mean([v.mean(axis=0) for v in out.values()], axis=0)
        np.testing.assert_allclose(mean, 1.0, atol=1e-12)

    def test_segment_spectrum_lists_round_trip(self):
        spectra = {1: [SegmentSpectrum(1, i, np.full(3, 2.0)) for i in range(2)],
                   2: [SegmentSpectrum(2, i, np.full(3, 4.0)) for i in range(2)]}
        out = normalize_spectra(spectra)
        assert isinstance(out[1][0], SegmentSpectrum)
        np.testing.assert_allclose(out[2][1].power, 4 / 3)

    def test_zero_reference(self):
        with pytest.raises(InputError) as e:
            normalize_spectra({1: np.zeros((2, 3)), 2: np.zeros((2, 3))})
        assert e.value.code == "ZeroReference"
