"""ROI identification, leave-one-subject-out validation, fingerprint networks
and the Henze-Zirkler multivariate normality test."""
from __future__ import annotations

from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy import stats

from .clustering import agglomerative, distance
from .errors import fail
from .fingerprint import SubjectCentroids, gmm_log_density, group_fingerprint
from .model import ClusterSettings, ConfusionMatrix, Dendrogram, Fingerprint, FrequencyAxis, Linkage, Metric
from .seeding import sub_seed


class Identification(NamedTuple):
    winner: int
    votes: dict


def _check_axes(fingerprints: Sequence[Fingerprint], F: int | None = None):
    if not fingerprints:
        raise fail("AxisMismatch", "no fingerprints")
    ax = fingerprints[0].axis
    for fp in fingerprints[1:]:
        if fp.axis != ax:
            raise fail("AxisMismatch", f"roi {fp.roi_id} uses a different frequency axis")
    if F is not None and F != len(ax):
        raise fail("AxisMismatch", f"test spectra have {F} frequencies, fingerprints {len(ax)}")


def identify(test_spectra, fingerprints: Sequence[Fingerprint]) -> Identification:
    """Each test spectrum votes for the ROI whose GMM gives it the highest
    log-likelihood; the plurality wins. All ties go to the lowest roi_id."""
    x = np.atleast_2d(np.asarray(test_spectra, dtype=np.float64))
    if x.shape[0] < 1:
        raise fail("AxisMismatch", "need at least one test spectrum")
    fps = sorted(fingerprints, key=lambda f: f.roi_id)
    _check_axes(fps, x.shape[1])
    ll = np.column_stack([
        gmm_log_density(x, fp.means, fp.covariances, fp.weights) for fp in fps
    ])
    picks = np.argmax(ll, axis=1)
    counts = np.bincount(picks, minlength=len(fps))
    votes = {fp.roi_id: int(c) for fp, c in zip(fps, counts)}
    return Identification(fps[int(np.argmax(counts))].roi_id, votes)


Identifier = Callable[[np.ndarray, Sequence[Fingerprint], int], int]


def _default_identifier(test, fingerprints, true_roi):
    return identify(test, fingerprints).winner


class LooResult(NamedTuple):
    confusion: ConfusionMatrix
    accuracy_per_fold: list
    mean_accuracy: float
    winners: list  # per fold: {roi_id: winner}


def _subjects(dataset: Mapping[int, Sequence[SubjectCentroids]]) -> list[int]:
    return sorted({c.subject_index for v in dataset.values() for c in v})


def train_fingerprints(dataset: Mapping[int, Sequence[SubjectCentroids]], axis: FrequencyAxis,
                       settings: ClusterSettings, seed: int,
                       exclude: Iterable[int] = ()) -> list[Fingerprint]:
    skip = set(exclude)
    out = []
    for ri, roi_id in enumerate(sorted(dataset)):
        contrib = [c for c in dataset[roi_id] if c.subject_index not in skip]
        out.append(group_fingerprint(roi_id, contrib, axis, settings, sub_seed(seed, ri)))
    return out


def loo_cross_validation(dataset: Mapping[int, Sequence[SubjectCentroids]], axis: FrequencyAxis,
                         settings: ClusterSettings, seed: int,
                         identifier: Identifier | None = None,
                         map_fn: Callable = map) -> LooResult:
    """Leave-one-subject-out ROI identification.

    ``dataset`` maps roi_id to every subject's individual centroids for that
    ROI. Fold ``i`` trains group fingerprints without subject ``i`` and
    identifies each of subject ``i``'s ROIs. ``identifier`` defaults to
    :func:`identify` and receives ``(test_spectra, fingerprints, true_roi)``.
    ``map_fn`` lets callers run folds on an executor; results are consumed in
    fold order.
    """
    subjects = _subjects(dataset)
    if len(subjects) < 3:
        raise fail("TooFewSubjects", f"LOO needs >= 3 subjects, got {len(subjects)}")
    roi_ids = sorted(dataset)
    ident = identifier or _default_identifier

    def run_fold(fi):
        held = subjects[fi]
        fps = train_fingerprints(dataset, axis, settings, sub_seed(seed, fi), exclude=[held])
        winners = {}
        for roi_id in roi_ids:
            test = [c for c in dataset[roi_id] if c.subject_index == held]
            if not test:
                raise fail("TooFewSubjects", f"subject {held} has no centroids for roi {roi_id}")
            winners[roi_id] = int(ident(np.atleast_2d(test[0].centroids), fps, roi_id))
        return winners

    pos = {r: i for i, r in enumerate(roi_ids)}
    counts = np.zeros((len(roi_ids), len(roi_ids)), dtype=np.int64)
    per_fold, winners_all = [], []
    for winners in map_fn(run_fold, range(len(subjects))):
        hits = 0
        for roi_id, w in winners.items():
            counts[pos[roi_id], pos[w]] += 1
            hits += w == roi_id
        per_fold.append(hits / len(roi_ids))
        winners_all.append(winners)
    cm = ConfusionMatrix(tuple(roi_ids), counts, len(subjects))
    return LooResult(cm, per_fold, cm.accuracy, winners_all)


def identify_individual(subject_centroids: Mapping[int, np.ndarray],
                        group_fingerprints: Sequence[Fingerprint]) -> dict[int, int]:
    """Identify every ROI of one subject against fingerprints trained without it."""
    return {roi_id: identify(c, group_fingerprints).winner
            for roi_id, c in sorted(subject_centroids.items())}


def fingerprint_distance(fp_a: Fingerprint, fp_b: Fingerprint,
                         metric: Metric | str = Metric.COSINE) -> float:
    """Smallest distance between any mode mean of ``fp_a`` and any of ``fp_b``."""
    if fp_a.axis != fp_b.axis:
        raise fail("AxisMismatch", f"rois {fp_a.roi_id} and {fp_b.roi_id}")
    return min(distance(a.mean, b.mean, metric) for a in fp_a.modes for b in fp_b.modes)


def fingerprint_distance_matrix(fingerprints: Sequence[Fingerprint],
                                metric: Metric | str = Metric.COSINE) -> np.ndarray:
    R = len(fingerprints)
    d = np.zeros((R, R))
    for i in range(R):
        for j in range(i + 1, R):
            d[i, j] = d[j, i] = fingerprint_distance(fingerprints[i], fingerprints[j], metric)
    return d


def network_analysis(fingerprints: Sequence[Fingerprint], linkage: Linkage | str = Linkage.AVERAGE,
                     metric: Metric | str = Metric.COSINE) -> Dendrogram:
    if len(fingerprints) < 2:
        raise fail("TooFewItems", "network analysis needs >= 2 fingerprints")
    d = fingerprint_distance_matrix(fingerprints, metric)
    return agglomerative(d, linkage, precomputed=True,
                         leaf_ids=[fp.roi_id for fp in fingerprints])


# ------------------------------------------------------------- Henze-Zirkler

class HZResult(NamedTuple):
    statistic: float
    p_value: float
    reject: bool
    beta: float
    lognormal_mean: float
    lognormal_sigma: float


def hz_beta(n: int, d: int) -> float:
    return (1.0 / np.sqrt(2.0)) * ((2 * d + 1) / 4.0) ** (1.0 / (d + 4)) * n ** (1.0 / (d + 4))


def hz_normality_test(points, alpha: float = 0.05) -> HZResult:
    """Henze-Zirkler test with the lognormal approximation of the null.

    Uses the maximum-likelihood (divide by n) sample covariance and the
    usual smoothing parameter ``beta(n, d)``.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2:
        raise fail("LengthMismatch", "points must be n x d")
    n, d = x.shape
    if n <= d:
        raise fail("SingularSampleCovariance", f"n={n} must exceed d={d}")
    xc = x - x.mean(axis=0)
    S = xc.T @ xc / n
    try:
        chol = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise fail("SingularSampleCovariance", "sample covariance is not positive definite") from None
    z = np.linalg.solve(chol, xc.T).T  # whitened: z_i . z_j = x_i' S^-1 x_j
    gram = z @ z.T
    dj = np.diag(gram)
    djk = dj[:, None] + dj[None, :] - 2.0 * gram

    b = hz_beta(n, d)
    b2 = b * b
    hz = n * (
        np.exp(-0.5 * b2 * djk).sum() / n ** 2
        - 2.0 * (1 + b2) ** (-d / 2) * np.exp(-b2 / (2 * (1 + b2)) * dj).sum() / n
        + (1 + 2 * b2) ** (-d / 2)
    )
    a = 1 + 2 * b2
    wb = (1 + b2) * (1 + 3 * b2)
    b4, b8 = b2 ** 2, b2 ** 4
    mu = 1 - a ** (-d / 2) * (1 + d * b2 / a + d * (d + 2) * b4 / (2 * a ** 2))
    si2 = (
        2 * (1 + 4 * b2) ** (-d / 2)
        + 2 * a ** (-d) * (1 + 2 * d * b4 / a ** 2 + 3 * d * (d + 2) * b8 / (4 * a ** 4))
        - 4 * wb ** (-d / 2) * (1 + 3 * d * b4 / (2 * wb) + d * (d + 2) * b8 / (2 * wb ** 2))
    )
    pmu = np.log(np.sqrt(mu ** 4 / (si2 + mu ** 2)))
    psi = np.sqrt(np.log((si2 + mu ** 2) / mu ** 2))
    p = float(stats.lognorm.sf(hz, psi, scale=np.exp(pmu)))
    return HZResult(float(hz), p, p < alpha, float(b), float(pmu), float(psi))
