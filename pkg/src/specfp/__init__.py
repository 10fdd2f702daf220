"""Spectral fingerprinting of multichannel electrophysiological recordings."""
from ._kernels import BACKEND as KERNEL_BACKEND
from .analysis import (
    fingerprint_distance, hz_normality_test, identify, identify_individual,
    loo_cross_validation, network_analysis,
)
from .clustering import agglomerative, distance, kmeans, select_k, silhouette
from .fingerprint import fit_gmm, group_fingerprint, individual_fingerprint, mode_sigma_band
from .model import (
    ClusterSettings, ConfusionMatrix, Dendrogram, Fingerprint, FrequencyAxis, GmmModel, KMode,
    Linkage, Metric, Normalization, Parcellation, Recording, Roi, SegmentSet, SegmentSpectrum,
    Spacing, SpatialFilter, SpectralMode, Window,
)
from .seeding import derive_seed
from .source import apply_spatial_filter, roi_spectrum, white_noise_recording
from .spectra import make_frequency_axis, normalize_spectra, segment_power_spectrum, segment_signal

__version__ = "0.1.0"
