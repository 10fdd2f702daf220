"""Segmentation, power at frequencies of interest, and whole-brain normalisation.

Power convention: ``P(f_k) = 2 |X_k|^2 / (L^2 W)`` where ``X_k`` is the DFT
coefficient of the windowed segment and ``W`` the mean squared window value.
A unit-amplitude sinusoid sitting on a bin therefore has power 0.5 under the
rectangular window.
"""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .errors import fail
from .model import FrequencyAxis, Recording, SegmentSet, SegmentSpectrum, Spacing, Window


def segment_length(segment_length_ms: float, sample_rate_hz: float) -> int:
    return int(round(segment_length_ms * sample_rate_hz / 1000.0))


def segment_signal(recording: Recording, segment_length_ms: float) -> SegmentSet:
    """Cut ``recording`` into contiguous, non-overlapping segments.

    Trailing samples that do not fill a whole segment are dropped.
    """
    L = segment_length(segment_length_ms, recording.sample_rate_hz)
    if L < 2:
        raise fail("SegmentTooShort", f"L={L} samples")
    T = recording.n_samples
    if T < L:
        raise fail("RecordingTooShort", f"T={T} < L={L}")
    S = T // L
    x = recording.samples[:, : S * L]
    segs = x.reshape(recording.channels, S, L).transpose(1, 0, 2)
    return SegmentSet(recording.subject_id, L, np.ascontiguousarray(segs))


def bin_frequencies(fs: float, L: int) -> np.ndarray:
    return np.arange(L // 2 + 1) * (fs / L)


def make_frequency_axis(f_min: float, f_max: float, n_freqs: int, spacing: Spacing | str,
                        fs: float, L: int, snap: bool = True) -> FrequencyAxis:
    spacing = Spacing(spacing)
    if not (f_max < fs / 2):
        raise fail("NyquistViolation", f"f_max={f_max} >= fs/2={fs / 2}")
    if not (0 < f_min < f_max):
        raise fail("DegenerateAxis", f"need 0 < f_min < f_max, got {f_min}, {f_max}")
    if n_freqs < 2:
        raise fail("DegenerateAxis", "F must be >= 2")
    if spacing is Spacing.LINEAR:
        f = np.linspace(f_min, f_max, n_freqs)
    else:
        f = np.logspace(np.log10(f_min), np.log10(f_max), n_freqs)
    f[0], f[-1] = f_min, f_max
    if snap:
        df = fs / L
        m = np.unique(np.round(f / df).astype(np.int64))
        m = m[(m >= 1) & (m <= (L - 1) // 2)]  # strictly inside (0, fs/2)
        f = m * df
        if f.shape[0] < 2:
            raise fail("DegenerateAxis", "fewer than 2 distinct frequencies after snapping")
    return FrequencyAxis(f, spacing, bool(snap))


def window_values(window: Window | str, L: int) -> np.ndarray:
    window = Window(window)
    if window is Window.RECTANGULAR:
        return np.ones(L)
    n = np.arange(L)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / L)  # periodic Hann


def power_at(segments: np.ndarray, axis: FrequencyAxis, window: Window | str,
             fs: float) -> np.ndarray:
    """Batched power estimate: ``(..., L)`` time series -> ``(..., F)`` powers."""
    x = np.asarray(segments, dtype=np.float64)
    L = x.shape[-1]
    f = axis.frequencies_hz
    if f[-1] > fs / 2:
        raise fail("AxisMismatch", "axis exceeds the Nyquist frequency of this signal")
    w = window_values(window, L)
    W = float(np.mean(w * w))
    X = np.fft.rfft(x * w, axis=-1)
    p = 2.0 * (X.real ** 2 + X.imag ** 2) / (L * L * W)
    df = fs / L
    pos = f / df
    idx = np.round(pos).astype(np.int64)
    if np.allclose(pos, idx, rtol=0, atol=1e-9):
        return np.ascontiguousarray(p[..., idx])
    lo = np.clip(np.floor(pos).astype(np.int64), 0, p.shape[-1] - 1)
    hi = np.clip(lo + 1, 0, p.shape[-1] - 1)
    frac = pos - lo
    return p[..., lo] * (1.0 - frac) + p[..., hi] * frac


def segment_power_spectrum(segment, axis: FrequencyAxis, window: Window | str,
                           fs: float) -> np.ndarray:
    x = np.asarray(segment, dtype=np.float64)
    if x.ndim != 1:
        raise fail("AxisMismatch", "segment must be a vector")
    if not np.all(np.isfinite(x)):
        raise fail("NanInput", "segment contains NaN/Inf")
    return power_at(x, axis, window, fs)


def full_power(segment, fs: float) -> np.ndarray:
    """All one-sided bins with the rectangular window, same convention."""
    x = np.asarray(segment, dtype=np.float64)
    L = x.shape[-1]
    X = np.fft.rfft(x)
    return 2.0 * np.abs(X) ** 2 / (L * L)


def _as_matrix(v) -> np.ndarray:
    if isinstance(v, np.ndarray):
        return v
    items = list(v)
    if items and isinstance(items[0], SegmentSpectrum):
        return np.stack([s.power for s in items])
    return np.asarray(items, dtype=np.float64)


def whole_brain_reference(roi_spectra: Mapping[int, np.ndarray | Sequence[SegmentSpectrum]]) -> np.ndarray:
    """Unweighted mean over ROIs of each ROI's segment-averaged power."""
    if not roi_spectra:
        raise fail("ZeroReference", "no ROIs given")
    per_roi = [_as_matrix(v).mean(axis=0) for v in roi_spectra.values()]
    shapes = {p.shape for p in per_roi}
    if len(shapes) != 1:
        raise fail("AxisMismatch", "ROI spectra disagree on F")
    return np.mean(per_roi, axis=0)


def normalize_spectra(roi_spectra: Mapping[int, np.ndarray | Sequence[SegmentSpectrum]],
                      reference: np.ndarray | None = None):
    """Divide every ROI's power by the subject's whole-brain reference.

    Accepts ``roi_id -> (S, F) array`` or ``roi_id -> [SegmentSpectrum]`` and
    returns the same form. ``reference`` may be supplied when it was computed
    over a wider ROI set than the one being normalised.
    """
    ref = whole_brain_reference(roi_spectra) if reference is None else np.asarray(reference)
    if np.any(ref <= 0):
        bad = np.flatnonzero(ref <= 0)
        raise fail("ZeroReference", f"reference is zero at frequency index {bad.tolist()}")
    out = {}
    for roi_id, v in roi_spectra.items():
        if isinstance(v, np.ndarray):
            out[roi_id] = v / ref
        else:
            out[roi_id] = [
                SegmentSpectrum(s.roi_id, s.segment_index, s.power / ref) for s in v
            ]
    return out
