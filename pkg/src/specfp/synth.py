"""Synthetic recordings with planted spectral modes.

Each ROI has a small repertoire of modes (sets of sinusoids). Every segment
of every voxel in the ROI carries one mode, drawn per segment from the ROI's
occurrence probabilities, with random phases and additive white noise. The
sources reach the sensors through a random orthogonal mixing matrix whose
transpose (its exact pseudo-inverse) is shipped as the spatial filter.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import fail
from .model import Parcellation, Recording, Roi, SpatialFilter
from .seeding import SYNTH, rng, sub_seed


@dataclass(frozen=True)
class PlantedMode:
    components: tuple[tuple[float, float], ...]  # (frequency_hz, amplitude)
    probability: float

    def __post_init__(self):
        object.__setattr__(self, "components",
                           tuple((float(f), float(a)) for f, a in self.components))

    @property
    def peak_frequency_hz(self) -> float:
        return max(self.components, key=lambda c: c[1])[0]


@dataclass(frozen=True)
class RoiSpec:
    name: str
    modes: tuple[PlantedMode, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))


@dataclass
class SynthDataset:
    recordings: list[Recording]
    filters: list[SpatialFilter]
    parcellation: Parcellation
    ground_truth: dict = field(default_factory=dict)


def _check_spec(spec: RoiSpec, fs: float, L: int) -> None:
    total = sum(m.probability for m in spec.modes)
    if abs(total - 1.0) > 1e-9:
        raise fail("InvalidProbabilities", f"{spec.name}: probabilities sum to {total}")
    for m in spec.modes:
        for f, _ in m.components:
            k = f * L / fs
            if abs(k - round(k)) > 1e-9 or not 0 < f < fs / 2:
                raise fail("OffGridFrequency", f"{spec.name}: {f} Hz is not a bin of fs={fs}, L={L}")


def random_orthogonal(n: int, gen: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(gen.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def planted_modes_dataset(roi_specs: Sequence[RoiSpec], n_subjects: int, segments_per_subject: int,
                          fs: float = 256.0, L: int = 256, noise_sigma: float = 0.1,
                          seed: int = 0, voxels_per_roi: int = 2,
                          homologue_pairs: Sequence[tuple[int, int]] = ()) -> SynthDataset:
    for spec in roi_specs:
        _check_spec(spec, fs, L)
    R = len(roi_specs)
    V = R * voxels_per_roi
    rois = tuple(
        Roi(r + 1, spec.name, tuple(range(r * voxels_per_roi, (r + 1) * voxels_per_roi)))
        for r, spec in enumerate(roi_specs)
    )
    parcellation = Parcellation("synthetic", rois)
    S = segments_per_subject
    t = np.arange(L) / fs

    recordings, filters, truth_modes = [], [], {}
    for subj in range(n_subjects):
        gen = rng(sub_seed(seed, SYNTH, subj))
        sid = f"sub-{subj + 1:02d}"
        src = np.empty((V, S, L))
        truth_modes[sid] = {}
        for r, spec in enumerate(roi_specs):
            probs = np.array([m.probability for m in spec.modes])
            modes = gen.choice(len(spec.modes), size=S, p=probs / probs.sum())
            truth_modes[sid][r + 1] = modes
            vox = slice(r * voxels_per_roi, (r + 1) * voxels_per_roi)
            block = np.zeros((voxels_per_roi, S, L))
            for mi, mode in enumerate(spec.modes):
                segs = np.flatnonzero(modes == mi)
                for f, amp in mode.components:
                    phase = gen.uniform(0.0, 2.0 * np.pi, size=(voxels_per_roi, segs.size))
                    block[:, segs, :] += amp * np.sin(2.0 * np.pi * f * t + phase[..., None])
            if noise_sigma > 0:
                block += noise_sigma * gen.standard_normal(block.shape)
            src[vox] = block
        mixing = random_orthogonal(V, gen)
        sensors = mixing @ src.reshape(V, S * L)
        recordings.append(Recording(sid, float(fs), sensors))
        filters.append(SpatialFilter(sid, tuple(range(V)), mixing.T.copy()))

    truth = {
        "modes": truth_modes,
        "roi_specs": {r + 1: spec for r, spec in enumerate(roi_specs)},
        "homologue_pairs": [tuple(p) for p in homologue_pairs],
        "fs": fs,
        "L": L,
    }
    return SynthDataset(recordings, filters, parcellation, truth)


def homologue_pair_dataset(shared: RoiSpec, others: Sequence[RoiSpec], n_subjects: int,
                           segments_per_subject: int, fs: float = 256.0, L: int = 256,
                           noise_sigma: float = 0.1, seed: int = 0,
                           voxels_per_roi: int = 2) -> SynthDataset:
    """ROIs 1 and 2 share ``shared``'s modes (a left/right pair); the rest follow."""
    left = RoiSpec(shared.name + "-L", shared.modes)
    right = RoiSpec(shared.name + "-R", shared.modes)
    return planted_modes_dataset([left, right, *others], n_subjects, segments_per_subject, fs, L,
                                 noise_sigma, seed, voxels_per_roi, homologue_pairs=[(1, 2)])


def example_specs() -> list[RoiSpec]:
    """Three ROIs with two single-frequency modes each, used by the demo config."""
    return [
        RoiSpec("occipital", (PlantedMode(((10.0, 1.0),), 0.7), PlantedMode(((21.0, 1.0),), 0.3))),
        RoiSpec("temporal", (PlantedMode(((6.0, 1.0),), 0.6), PlantedMode(((14.0, 1.0),), 0.4))),
        RoiSpec("frontal", (PlantedMode(((4.0, 1.0),), 0.5), PlantedMode(((27.0, 1.0),), 0.5))),
    ]
