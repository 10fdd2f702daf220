"""Individual-level clustering, regularised GMM fitting and group fingerprints."""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp

from .clustering import kmeans, select_k
from .errors import fail
from .model import (
    ClusterSettings, FrequencyAxis, Fingerprint, GmmModel, KMode, Metric, SpectralMode,
)
from .seeding import sub_seed

_LOG_2PI = np.log(2.0 * np.pi)
LAMBDA_FLOOR = 1e-10


class IndividualFingerprint(NamedTuple):
    centroids: np.ndarray  # k x F, in the units of the input spectra
    durations: np.ndarray  # k percentages, sum to 100
    assignment: np.ndarray
    silhouette_scores: dict


def choose_k(points, mode: KMode, metric: Metric, seed: int, settings: ClusterSettings):
    """Run k-means with a fixed k or the silhouette-selected k.

    Returns ``(KMeansResult, scores)``. The upper end of the silhouette range
    is clamped to ``n - 1``.
    """
    n = points.shape[0]
    if mode.kind == "fixed":
        if mode.k > n:
            raise fail("KTooLarge", f"k={mode.k} with n={n}")
        res = kmeans(points, mode.k, metric, sub_seed(seed, mode.k), settings.max_iter,
                     settings.n_restarts)
        return res, {}
    k_max = min(mode.k_max, n - 1)
    if k_max < mode.k_min:
        raise fail("TooFewSegments", f"{n} points cannot support k_min={mode.k_min}")
    sel = select_k(points, mode.k_min, k_max, metric, seed, settings.max_iter, settings.n_restarts)
    return sel.results[sel.best_k], sel.scores


def _member_means(points, labels, k):
    sizes = np.bincount(labels, minlength=k).astype(np.float64)
    c = np.zeros((k, points.shape[1]))
    np.add.at(c, labels, points)
    return c / sizes[:, None]


def individual_fingerprint(spectra, settings: ClusterSettings, seed: int) -> IndividualFingerprint:
    """Cluster one subject's segment spectra for one ROI.

    Centroids are reported as the arithmetic mean of member spectra, so they
    stay in spectrum units even when clustering under the cosine metric.
    """
    x = np.asarray(spectra, dtype=np.float64)
    S = x.shape[0]
    mode = settings.k_mode
    need = mode.k if mode.kind == "fixed" else mode.k_min + 1
    if S < need:
        raise fail("TooFewSegments", f"{S} segments, need >= {need}")
    res, scores = choose_k(x, mode, settings.distance, seed, settings)
    k = res.centroids.shape[0]
    labels = np.asarray(res.assignment, dtype=np.int64)
    counts = np.bincount(labels, minlength=k)
    return IndividualFingerprint(_member_means(x, labels, k), 100.0 * counts / S, labels, scores)


# --------------------------------------------------------------------------- GMM

def _chol_logpdf(x, mean, cov):
    chol = np.linalg.cholesky(cov)
    diff = (x - mean).T
    z = np.linalg.solve(chol, diff) if x.shape[0] else diff
    maha = np.einsum("ij,ij->j", z, z)
    logdet = 2.0 * np.log(np.diag(chol)).sum()
    return -0.5 * (x.shape[1] * _LOG_2PI + logdet + maha)


def component_log_densities(points, means, covariances, weights) -> np.ndarray:
    """``n x k`` matrix of ``log w_j + log N(x_i | mu_j, Sigma_j)``."""
    x = np.atleast_2d(np.asarray(points, dtype=np.float64))
    out = np.empty((x.shape[0], len(weights)))
    for j, (m, c, w) in enumerate(zip(means, covariances, weights)):
        try:
            out[:, j] = np.log(w) + _chol_logpdf(x, m, c)
        except np.linalg.LinAlgError:
            raise fail("SingularCovariance", f"component {j} covariance not positive definite") from None
    return out


def gmm_log_density(points, means, covariances, weights) -> np.ndarray:
    return logsumexp(component_log_densities(points, means, covariances, weights), axis=1)


def default_lambda(points) -> float:
    """``1e-6`` times the mean diagonal of the sample covariance, floored."""
    x = np.asarray(points, dtype=np.float64)
    if x.shape[0] < 2:
        return LAMBDA_FLOOR
    var = x.var(axis=0).mean()
    return max(1e-6 * float(var), LAMBDA_FLOOR)


def _sym(c):
    return 0.5 * (c + c.swapaxes(-1, -2))


def fit_gmm(points, k: int, lam: float | None = None, seed: int = 0, max_iter: int = 200,
            tol: float = 1e-8, init_metric: Metric | str = Metric.EUCLIDEAN,
            n_restarts: int = 10) -> GmmModel:
    """Full-covariance EM with ``lam * I`` added after every M-step.

    Initialised from a seeded k-means partition (member means, member
    covariances, member fractions). Stops once the log-likelihood gain drops
    below ``tol`` or after ``max_iter`` iterations.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2:
        raise fail("LengthMismatch", "points must be n x F")
    n, F = x.shape
    if not 1 <= k <= n:
        raise fail("KTooLarge", f"k={k} with n={n}")
    lam = default_lambda(x) if lam is None else float(lam)
    if lam < 0:
        raise fail("NegativeLambda", str(lam))
    eye = np.eye(F)

    labels = np.asarray(kmeans(x, k, init_metric, seed, n_restarts=n_restarts).assignment)
    resp = np.zeros((n, k))
    resp[np.arange(n), labels] = 1.0
    weights, means, covs = _m_step(x, resp, lam, eye)

    history: list[float] = []
    it = 0
    for it in range(1, max_iter + 2):
        logp = component_log_densities(x, means, covs, weights)
        ll_i = logsumexp(logp, axis=1)
        ll = float(ll_i.sum())
        if history and ll < history[-1]:
            # the ridge can cost a rounding-level decrease; keep the better parameters
            weights, means, covs = prev
            break
        history.append(ll)
        if it > max_iter or (len(history) > 1 and history[-1] - history[-2] < tol):
            break
        prev = (weights, means, covs)
        resp = np.exp(logp - ll_i[:, None])
        weights, means, covs = _m_step(x, resp, lam, eye, means)
    final = history[-1]
    return GmmModel(means, covs, weights, lam, final, tuple(history), len(history) - 1)


def _m_step(x, resp, lam, eye, prev_means=None):
    n = x.shape[0]
    nk = resp.sum(axis=0)
    k = nk.shape[0]
    tiny = 10 * np.finfo(float).eps
    weights = nk / n
    weights = weights / weights.sum()
    means = np.empty((k, x.shape[1]))
    covs = np.empty((k, x.shape[1], x.shape[1]))
    for j in range(k):
        if nk[j] < tiny:
            means[j] = prev_means[j] if prev_means is not None else x.mean(axis=0)
            covs[j] = lam * eye if lam > 0 else np.cov(x, rowvar=False, bias=True).reshape(eye.shape)
            continue
        means[j] = resp[:, j] @ x / nk[j]
        d = x - means[j]
        c = (resp[:, j, None] * d).T @ d / nk[j]
        covs[j] = _sym(c) + lam * eye
    return weights, means, covs


# ---------------------------------------------------------------- group level

class SubjectCentroids(NamedTuple):
    """One subject's individual-level result for one ROI."""

    subject_index: int
    centroids: np.ndarray
    durations: np.ndarray


def peak_frequency(mean, axis: FrequencyAxis) -> float:
    return float(axis.frequencies_hz[int(np.argmax(mean))])


def group_fingerprint(roi_id: int, contributions: Sequence[SubjectCentroids], axis: FrequencyAxis,
                      settings: ClusterSettings, seed: int) -> Fingerprint:
    """Pool individual centroids across subjects and model them as a GMM.

    Per mode: GMM weight; duration = mean of member centroids' individual
    durations; subject support = distinct subjects among members; peak = the
    axis frequency where the mode mean is largest. Membership is the hard
    assignment by maximal responsibility.
    """
    subjects = {c.subject_index for c in contributions}
    if len(subjects) < 2:
        raise fail("TooFewSubjects", f"roi {roi_id}: centroids from {len(subjects)} subject(s)")
    pts = np.concatenate([np.atleast_2d(c.centroids) for c in contributions])
    durs = np.concatenate([np.asarray(c.durations, dtype=np.float64) for c in contributions])
    owner = np.concatenate([np.full(len(c.durations), c.subject_index) for c in contributions])
    if pts.shape[1] != len(axis):
        raise fail("AxisMismatch", "centroid length differs from the axis")

    mode = settings.group_k
    if mode.kind == "fixed":
        k = mode.k
    else:
        n = pts.shape[0]
        k_max = min(mode.k_max, n - 1)
        if k_max < mode.k_min:
            k = 1
        else:
            k = select_k(pts, mode.k_min, k_max, settings.distance, sub_seed(seed, 1),
                         settings.max_iter, settings.n_restarts).best_k
    gmm = fit_gmm(pts, k, settings.regularization_lambda, sub_seed(seed, 2),
                  settings.gmm_max_iter, settings.gmm_tol, settings.distance, settings.n_restarts)
    members = np.argmax(component_log_densities(pts, gmm.means, gmm.covariances, gmm.weights), axis=1)

    modes = []
    for j in range(gmm.k):
        sel = members == j
        modes.append(SpectralMode(
            mean=gmm.means[j],
            covariance=gmm.covariances[j],
            weight=float(gmm.weights[j]),
            duration_percent=float(durs[sel].mean()) if sel.any() else 0.0,
            subject_support=int(np.unique(owner[sel]).size),
            peak_frequency_hz=peak_frequency(gmm.means[j], axis),
        ))
    return Fingerprint(roi_id, tuple(modes), axis)


def mode_sigma_band(mode: SpectralMode) -> tuple[np.ndarray, np.ndarray]:
    """``(upper, lower)`` = mean +/- sqrt of the covariance diagonal.

    Only ``mode.mean`` and ``mode.covariance`` are read, so any object carrying
    those works, including semi-definite covariances that a validated
    ``SpectralMode`` would reject.
    """
    diag = np.diag(np.asarray(mode.covariance, dtype=np.float64))
    if np.any(diag < 0):
        raise fail("NegativeDiagonal", "covariance diagonal has negative entries")
    s = np.sqrt(diag)
    mean = np.asarray(mode.mean, dtype=np.float64)
    return mean + s, mean - s
