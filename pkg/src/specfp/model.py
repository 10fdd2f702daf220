"""Core domain types.

All types are frozen dataclasses. Array fields are stored as float64 views
with the writeable flag cleared, so instances can be shared between worker
threads without copying. Construction validates invariants and raises
:class:`~specfp.errors.InvariantViolation` naming the failed rule.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvariantViolation


def _frozen(a, dtype=np.float64) -> np.ndarray:
    arr = np.asarray(a, dtype=dtype)
    view = arr.view()
    view.flags.writeable = False
    return view


def _finite(name: str, inv: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise InvariantViolation(name, inv, "non-finite entries")


class Spacing(str, enum.Enum):
    LINEAR = "linear"
    LOGARITHMIC = "logarithmic"


class Window(str, enum.Enum):
    RECTANGULAR = "rectangular"
    HANN = "hann"


class Normalization(str, enum.Enum):
    NONE = "none"
    WHOLE_BRAIN_RATIO = "whole_brain_ratio"


class Metric(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    COSINE = "cosine"


class Linkage(str, enum.Enum):
    SINGLE = "single"
    AVERAGE = "average"


@dataclass(frozen=True, eq=False)
class Recording:
    subject_id: str
    sample_rate_hz: float
    samples: np.ndarray  # C x T

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen(self.samples))
        self.validate()

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    def validate(self) -> None:
        if not (self.sample_rate_hz > 0 and np.isfinite(self.sample_rate_hz)):
            raise InvariantViolation("Recording", "sample_rate_hz > 0")
        if self.samples.ndim != 2 or self.samples.shape[0] < 1:
            raise InvariantViolation("Recording", "samples is a C x T matrix with C >= 1")
        if self.samples.shape[1] < 1:
            raise InvariantViolation("Recording", "T >= 1")
        _finite("Recording", "no NaN/Inf entries", self.samples)


@dataclass(frozen=True, eq=False)
class SegmentSet:
    subject_id: str
    segment_length_samples: int
    segments: np.ndarray  # S x C x L

    def __post_init__(self):
        object.__setattr__(self, "segments", _frozen(self.segments))
        self.validate()

    @property
    def n_segments(self) -> int:
        return self.segments.shape[0]

    def validate(self) -> None:
        if self.segments.ndim != 3 or self.segments.shape[0] < 1:
            raise InvariantViolation("SegmentSet", "S >= 1")
        if self.segments.shape[2] != self.segment_length_samples:
            raise InvariantViolation("SegmentSet", "segment axis length equals L")


@dataclass(frozen=True, eq=False)
class SpatialFilter:
    subject_id: str
    voxel_ids: tuple[int, ...]
    weights: np.ndarray  # V x C

    def __post_init__(self):
        object.__setattr__(self, "voxel_ids", tuple(int(v) for v in self.voxel_ids))
        object.__setattr__(self, "weights", _frozen(self.weights))
        self.validate()

    def validate(self) -> None:
        v = len(self.voxel_ids)
        if v < 1:
            raise InvariantViolation("SpatialFilter", "V >= 1")
        if len(set(self.voxel_ids)) != v or min(self.voxel_ids) < 0:
            raise InvariantViolation("SpatialFilter", "voxel_ids distinct and non-negative")
        if self.weights.ndim != 2 or self.weights.shape[0] != v:
            raise InvariantViolation("SpatialFilter", "row count equals voxel_ids length")
        _finite("SpatialFilter", "no NaN/Inf", self.weights)

    def row_of(self) -> dict[int, int]:
        return {vid: i for i, vid in enumerate(self.voxel_ids)}


@dataclass(frozen=True)
class Roi:
    roi_id: int
    roi_name: str
    voxels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "voxels", tuple(int(v) for v in self.voxels))


@dataclass(frozen=True)
class Parcellation:
    name: str
    rois: tuple[Roi, ...]

    def __post_init__(self):
        object.__setattr__(self, "rois", tuple(self.rois))
        self.validate()

    def validate(self) -> None:
        ids = [r.roi_id for r in self.rois]
        if len(set(ids)) != len(ids):
            raise InvariantViolation("Parcellation", "roi_ids unique")
        seen: set[int] = set()
        for r in self.rois:
            if not r.voxels:
                raise InvariantViolation("Parcellation", "every voxel list non-empty", f"roi {r.roi_id}")
            vs = set(r.voxels)
            if len(vs) != len(r.voxels) or vs & seen:
                raise InvariantViolation(
                    "Parcellation", "a voxel may appear in at most one ROI", f"roi {r.roi_id}"
                )
            seen |= vs

    @property
    def roi_ids(self) -> list[int]:
        return [r.roi_id for r in self.rois]

    def roi(self, roi_id: int) -> Roi:
        for r in self.rois:
            if r.roi_id == roi_id:
                return r
        raise KeyError(roi_id)

    def subset(self, roi_ids: Sequence[int]) -> "Parcellation":
        wanted = set(roi_ids)
        return Parcellation(self.name, tuple(r for r in self.rois if r.roi_id in wanted))


@dataclass(frozen=True, eq=False)
class FrequencyAxis:
    frequencies_hz: np.ndarray
    spacing: Spacing = Spacing.LINEAR
    bin_snapped: bool = False

    def __post_init__(self):
        object.__setattr__(self, "frequencies_hz", _frozen(self.frequencies_hz))
        object.__setattr__(self, "spacing", Spacing(self.spacing))
        self.validate()

    def __len__(self) -> int:
        return self.frequencies_hz.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrequencyAxis):
            return NotImplemented
        return (
            self.spacing == other.spacing
            and self.bin_snapped == other.bin_snapped
            and np.array_equal(self.frequencies_hz, other.frequencies_hz)
        )

    __hash__ = None

    def validate(self, sample_rate_hz: float | None = None) -> None:
        f = self.frequencies_hz
        if f.ndim != 1 or f.shape[0] < 2:
            raise InvariantViolation("FrequencyAxis", "F >= 2")
        _finite("FrequencyAxis", "finite frequencies", f)
        if f[0] <= 0:
            raise InvariantViolation("FrequencyAxis", "positive frequencies")
        if np.any(np.diff(f) <= 0):
            raise InvariantViolation("FrequencyAxis", "strictly increasing")
        if sample_rate_hz is not None and f[-1] >= sample_rate_hz / 2:
            raise InvariantViolation("FrequencyAxis", "max frequency < sample_rate_hz/2")


@dataclass(frozen=True, eq=False)
class SegmentSpectrum:
    roi_id: int
    segment_index: int
    power: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "power", _frozen(self.power))
        if self.power.ndim != 1:
            raise InvariantViolation("SegmentSpectrum", "power is a vector")
        _finite("SegmentSpectrum", "finite power", self.power)


@dataclass(frozen=True, eq=False)
class SpectralMode:
    mean: np.ndarray
    covariance: np.ndarray
    weight: float
    duration_percent: float
    subject_support: int
    peak_frequency_hz: float

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(self.mean))
        object.__setattr__(self, "covariance", _frozen(self.covariance))
        self.validate()

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))

    def validate(self, axis: FrequencyAxis | None = None) -> None:
        f = self.mean.shape[0]
        c = self.covariance
        if c.shape != (f, f):
            raise InvariantViolation("SpectralMode", "covariance is F x F")
        if not np.array_equal(c, c.T):
            raise InvariantViolation("SpectralMode", "covariance symmetric")
        try:
            np.linalg.cholesky(c)
        except np.linalg.LinAlgError:
            raise InvariantViolation("SpectralMode", "covariance positive definite") from None
        if not (0 < self.weight <= 1):
            raise InvariantViolation("SpectralMode", "weight in (0,1]", str(self.weight))
        if not (0 <= self.duration_percent <= 100):
            raise InvariantViolation("SpectralMode", "duration_percent in [0,100]")
        if self.subject_support < 0:
            raise InvariantViolation("SpectralMode", "subject_support >= 0")
        if axis is not None and self.peak_frequency_hz not in set(axis.frequencies_hz.tolist()):
            raise InvariantViolation("SpectralMode", "peak_frequency_hz in frequencies_hz")


@dataclass(frozen=True, eq=False)
class Fingerprint:
    roi_id: int
    modes: tuple[SpectralMode, ...]
    axis: FrequencyAxis

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        self.validate()

    def validate(self) -> None:
        if not self.modes:
            raise InvariantViolation("Fingerprint", "non-empty list of modes")
        for m in self.modes:
            if m.mean.shape[0] != len(self.axis):
                raise InvariantViolation("Fingerprint", "mode length matches axis")
            m.validate(self.axis)
        total = sum(m.weight for m in self.modes)
        if abs(total - 1.0) > 1e-9:
            raise InvariantViolation("Fingerprint", "mode weights sum to 1", f"sum={total!r}")

    @property
    def means(self) -> np.ndarray:
        return np.stack([m.mean for m in self.modes])

    @property
    def covariances(self) -> np.ndarray:
        return np.stack([m.covariance for m in self.modes])

    @property
    def weights(self) -> np.ndarray:
        return np.array([m.weight for m in self.modes])

    def support_flags(self, threshold: int = 5) -> list[bool]:
        """True where a mode is backed by at least ``threshold`` subjects."""
        return [m.subject_support >= threshold for m in self.modes]


@dataclass(frozen=True, eq=False)
class GmmModel:
    means: np.ndarray  # k x F
    covariances: np.ndarray  # k x F x F
    weights: np.ndarray  # k
    regularization_lambda: float
    final_log_likelihood: float
    log_likelihood_history: tuple[float, ...] = ()
    n_iter: int = 0

    def __post_init__(self):
        for name in ("means", "covariances", "weights"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        object.__setattr__(self, "log_likelihood_history", tuple(self.log_likelihood_history))
        self.validate()

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    def validate(self) -> None:
        if abs(float(self.weights.sum()) - 1.0) > 1e-9:
            raise InvariantViolation("GmmModel", "weights sum to 1")
        if self.regularization_lambda < 0:
            raise InvariantViolation("GmmModel", "regularization_lambda >= 0")
        for c in self.covariances:
            if not np.array_equal(c, c.T):
                raise InvariantViolation("GmmModel", "covariance symmetric")


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    roi_ids: tuple[int, ...]
    counts: np.ndarray
    n_iterations: int

    def __post_init__(self):
        object.__setattr__(self, "roi_ids", tuple(self.roi_ids))
        object.__setattr__(self, "counts", _frozen(self.counts, dtype=np.int64))
        self.validate()

    def validate(self) -> None:
        r = len(self.roi_ids)
        if self.counts.shape != (r, r):
            raise InvariantViolation("ConfusionMatrix", "counts is R x R")
        if np.any(self.counts < 0):
            raise InvariantViolation("ConfusionMatrix", "non-negative counts")
        if self.n_iterations < 1 or np.any(self.counts.sum(axis=1) != self.n_iterations):
            raise InvariantViolation("ConfusionMatrix", "every row sums to n_iterations")

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / (len(self.roi_ids) * self.n_iterations)


@dataclass(frozen=True)
class Dendrogram:
    leaf_ids: tuple
    merges: tuple[tuple[int, int, float], ...]
    linkage: Linkage = Linkage.AVERAGE

    def __post_init__(self):
        object.__setattr__(self, "leaf_ids", tuple(self.leaf_ids))
        object.__setattr__(
            self, "merges", tuple((int(a), int(b), float(h)) for a, b, h in self.merges)
        )
        self.validate()

    def validate(self) -> None:
        r = len(self.leaf_ids)
        if len(self.merges) != r - 1:
            raise InvariantViolation("Dendrogram", "R-1 merges")
        used: set[int] = set()
        prev = -np.inf
        for i, (a, b, h) in enumerate(self.merges):
            if h < 0:
                raise InvariantViolation("Dendrogram", "non-negative heights")
            for node in (a, b):
                if node in used or node >= r + i or node < 0:
                    raise InvariantViolation("Dendrogram", "every node merged exactly once")
                used.add(node)
            if h < prev:
                raise InvariantViolation("Dendrogram", "heights non-decreasing")
            prev = h


@dataclass(frozen=True)
class KMode:
    """Cluster-count policy: ``fixed`` uses ``k``; ``silhouette`` scans k_min..k_max."""

    kind: str = "silhouette"
    k: int | None = None
    k_min: int = 2
    k_max: int = 6

    def __post_init__(self):
        if self.kind == "fixed":
            if self.k is None or self.k < 1:
                raise InvariantViolation("KMode", "fixed mode needs k >= 1")
        elif self.kind == "silhouette":
            if self.k_min < 2:
                raise InvariantViolation("KMode", "k_min >= 2 when silhouette mode")
            if self.k_max < self.k_min:
                raise InvariantViolation("KMode", "k_max >= k_min")
        else:
            raise InvariantViolation("KMode", "kind in {fixed, silhouette}", self.kind)

    @classmethod
    def fixed(cls, k: int) -> "KMode":
        return cls(kind="fixed", k=k)

    @classmethod
    def silhouette(cls, k_min: int = 2, k_max: int = 6) -> "KMode":
        return cls(kind="silhouette", k_min=k_min, k_max=k_max)

    def to_json(self) -> dict:
        if self.kind == "fixed":
            return {"kind": "fixed", "k": self.k}
        return {"kind": "silhouette", "k_min": self.k_min, "k_max": self.k_max}


@dataclass(frozen=True)
class ClusterSettings:
    """The subset of pipeline configuration used by the clustering stages."""

    distance: Metric = Metric.COSINE
    k_mode: KMode = field(default_factory=KMode)
    group_k_mode: KMode | None = None
    regularization_lambda: float | None = None  # None -> scale-relative default
    n_restarts: int = 10
    max_iter: int = 300
    gmm_max_iter: int = 200
    gmm_tol: float = 1e-8
    subject_support_threshold: int = 5

    def __post_init__(self):
        object.__setattr__(self, "distance", Metric(self.distance))

    @property
    def group_k(self) -> KMode:
        return self.group_k_mode if self.group_k_mode is not None else self.k_mode
