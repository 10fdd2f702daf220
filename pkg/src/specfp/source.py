"""Source reconstruction with precomputed spatial filters and ROI aggregation."""
from __future__ import annotations

from typing import Mapping

import numpy as np

from .errors import fail
from .model import FrequencyAxis, Parcellation, Recording, Roi, SpatialFilter, Window
from .seeding import rng
from .spectra import power_at


def apply_spatial_filter(segment, filt: SpatialFilter) -> np.ndarray:
    """Project sensor data onto voxels: ``weights @ segment``.

    ``segment`` is ``C x L`` or a stack ``S x C x L``; the result is ``V x L``
    (or ``S x V x L``).
    """
    x = np.asarray(segment, dtype=np.float64)
    C = filt.weights.shape[1]
    if x.ndim not in (2, 3) or x.shape[-2] != C:
        raise fail("DimensionMismatch", f"filter expects {C} channels, got shape {x.shape}")
    return np.matmul(filt.weights, x)


def roi_spectrum(voxel_spectra: Mapping[int, np.ndarray], roi: Roi) -> np.ndarray:
    """Unweighted mean of the ROI's voxel spectra."""
    rows = []
    for v in roi.voxels:
        if v not in voxel_spectra:
            raise fail("MissingVoxel", f"voxel {v} of roi {roi.roi_id} has no spectrum")
        rows.append(np.asarray(voxel_spectra[v], dtype=np.float64))
    return np.mean(rows, axis=0)


def roi_rows(parcellation: Parcellation, filt: SpatialFilter) -> dict[int, np.ndarray]:
    """Filter row indices for every ROI's voxels."""
    row_of = filt.row_of()
    out = {}
    for roi in parcellation.rois:
        missing = [v for v in roi.voxels if v not in row_of]
        if missing:
            raise fail("MissingVoxel", f"voxel {missing[0]} of roi {roi.roi_id} not in spatial filter")
        out[roi.roi_id] = np.array([row_of[v] for v in roi.voxels], dtype=np.int64)
    return out


def roi_segment_spectra(segments: np.ndarray, filt: SpatialFilter, parcellation: Parcellation,
                        axis: FrequencyAxis, window: Window | str, fs: float,
                        chunk: int = 64) -> dict[int, np.ndarray]:
    """Per-ROI ``S x F`` power, estimated per voxel then averaged over the ROI.

    Only the filter rows that belong to some ROI are reconstructed. Segments
    are processed in chunks to bound memory.
    """
    rows = roi_rows(parcellation, filt)
    used = np.unique(np.concatenate(list(rows.values())))
    local = {rid: np.searchsorted(used, r) for rid, r in rows.items()}
    w = filt.weights[used]
    S = segments.shape[0]
    out = {rid: np.empty((S, len(axis))) for rid in rows}
    for start in range(0, S, chunk):
        block = np.matmul(w, segments[start:start + chunk])  # s x V x L
        p = power_at(block, axis, window, fs)  # s x V x F
        for rid, idx in local.items():
            out[rid][start:start + chunk] = p[:, idx, :].mean(axis=1)
    return out


def white_noise_recording(subject_id: str, channels: int, n_samples: int, fs: float,
                          seed: int) -> Recording:
    if channels < 1 or n_samples < 1:
        raise fail("DimensionMismatch", "channels and n_samples must be >= 1")
    x = rng(seed).standard_normal((channels, n_samples))
    return Recording(subject_id, float(fs), x)
