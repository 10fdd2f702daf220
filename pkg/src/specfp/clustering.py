"""Distances, seeded k-means, silhouette model selection and agglomerative clustering.

Ties always resolve toward the lowest index (centroid, restart, k, node pair),
so identical inputs and seeds reproduce bit-identical results.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import fail
from .model import Dendrogram, Linkage, Metric
from .seeding import rng, sub_seed


def distance(a, b, metric: Metric | str = Metric.EUCLIDEAN) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise fail("LengthMismatch", f"{a.shape} vs {b.shape}")
    metric = Metric(metric)
    if metric is Metric.EUCLIDEAN:
        return float(np.linalg.norm(a - b))
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise fail("ZeroVector", "cosine distance undefined for a zero vector")
    d = 1.0 - float(np.dot(a / na, b / nb))
    return min(max(d, 0.0), 2.0)


def _check_points(points, metric: Metric) -> np.ndarray:
    x = np.ascontiguousarray(points, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise fail("LengthMismatch", "points must be an n x F matrix")
    if not np.all(np.isfinite(x)):
        raise fail("NanInput", "points contain NaN/Inf")
    if metric is Metric.COSINE and np.any(np.linalg.norm(x, axis=1) == 0):
        raise fail("ZeroVector", "cosine metric needs non-zero rows")
    return x


def pairwise(points, metric: Metric | str = Metric.EUCLIDEAN) -> np.ndarray:
    metric = Metric(metric)
    x = _check_points(points, metric)
    d = _kernels.pairwise_distances(x, x, _kernels.METRIC_CODES[metric.value])
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


class KMeansResult(NamedTuple):
    centroids: np.ndarray
    assignment: np.ndarray
    objective: float


class LloydRun(NamedTuple):
    centroids: np.ndarray
    assignment: np.ndarray
    objective: float
    history: list
    n_iter: int


def _assign(x, c, metric: Metric):
    # euclidean k-means assigns and scores on squared distance
    code = _kernels.SQEUCLIDEAN if metric is Metric.EUCLIDEAN else _kernels.METRIC_CODES["cosine"]
    return _kernels.assign_nearest(x, c, code)


def _update(x, labels, dists, k, metric: Metric):
    labels = labels.copy()
    sizes = np.bincount(labels, minlength=k)
    c = np.zeros((k, x.shape[1]))
    # repair empty clusters by seizing the point farthest from its centroid
    d = dists.copy()
    for j in np.flatnonzero(sizes == 0):
        donors = sizes[labels] > 1
        cand = np.where(donors, d, -np.inf)
        i = int(np.argmax(cand))
        sizes[labels[i]] -= 1
        labels[i] = j
        sizes[j] = 1
        d[i] = -np.inf
    np.add.at(c, labels, x)
    c /= sizes[:, None]
    if metric is Metric.COSINE:
        norms = np.linalg.norm(c, axis=1)
        for j in np.flatnonzero(norms == 0):
            c[j] = x[np.flatnonzero(labels == j)[0]]
            norms[j] = 1.0
        c /= norms[:, None]
    return c


def _kmeans_pp(x, k, metric: Metric, gen: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(gen.integers(n))]
    code = _kernels.SQEUCLIDEAN if metric is Metric.EUCLIDEAN else _kernels.METRIC_CODES["cosine"]
    dmin = _kernels.pairwise_distances(x, x[chosen], code)[:, 0]
    for _ in range(1, k):
        w = dmin if metric is Metric.EUCLIDEAN else dmin ** 2
        w = w.copy()
        w[chosen] = 0.0
        total = w.sum()
        if total > 0:
            nxt = int(np.searchsorted(np.cumsum(w), gen.random() * total, side="right"))
            nxt = min(nxt, n - 1)
            while w[nxt] == 0:  # guard against landing on a zero-weight slot
                nxt -= 1
        else:
            remaining = np.setdiff1d(np.arange(n), chosen)
            nxt = int(remaining[gen.integers(remaining.size)])
        chosen.append(nxt)
        dmin = np.minimum(dmin, _kernels.pairwise_distances(x, x[[nxt]], code)[:, 0])
    return x[chosen].copy()


def lloyd(points, init_centroids, metric: Metric | str = Metric.EUCLIDEAN,
          max_iter: int = 300) -> LloydRun:
    """Lloyd iterations from given centroids; records the objective after every assignment.

    Euclidean objective is the within-cluster sum of squared distances; cosine
    objective is the sum of cosine distances to unit-length centroids.
    """
    metric = Metric(metric)
    x = _check_points(points, metric)
    if metric is Metric.COSINE:
        x = x / np.linalg.norm(x, axis=1)[:, None]
    c = np.ascontiguousarray(init_centroids, dtype=np.float64)
    k = c.shape[0]
    if metric is Metric.COSINE:
        c = c / np.linalg.norm(c, axis=1)[:, None]
    labels, d = _assign(x, c, metric)
    history = [float(d.sum())]
    it = 0
    while it < max_iter:
        it += 1
        c = _update(x, labels, d, k, metric)
        new_labels, d = _assign(x, c, metric)
        history.append(float(d.sum()))
        converged = np.array_equal(new_labels, labels)
        labels = new_labels
        if converged:
            break
    return LloydRun(c, labels, history[-1], history, it)


def kmeans(points, k: int, metric: Metric | str = Metric.EUCLIDEAN, seed: int = 0,
           max_iter: int = 300, n_restarts: int = 10) -> KMeansResult:
    """Best of ``n_restarts`` k-means++ initialised Lloyd runs."""
    metric = Metric(metric)
    x = _check_points(points, metric)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise fail("KTooLarge", f"k={k} with n={n} points")
    if metric is Metric.COSINE:
        x = x / np.linalg.norm(x, axis=1)[:, None]
    best = None
    for r in range(max(1, n_restarts)):
        gen = rng(sub_seed(seed, r))
        run = lloyd(x, _kmeans_pp(x, k, metric, gen), metric, max_iter)
        if best is None or run.objective < best.objective:
            best = run
    return KMeansResult(best.centroids, best.assignment, best.objective)


class Silhouette(NamedTuple):
    per_point: np.ndarray
    mean: float


def silhouette(points, assignment, metric: Metric | str = Metric.EUCLIDEAN,
               dist: np.ndarray | None = None) -> Silhouette:
    """Mean silhouette; points alone in their cluster score 0.

    ``dist`` may carry a precomputed pairwise matrix for the same points.
    """
    labels = np.asarray(assignment)
    uniq, inv = np.unique(labels, return_inverse=True)
    if uniq.size < 2:
        raise fail("SingleCluster", "silhouette needs >= 2 non-empty clusters")
    if dist is None:
        dist = pairwise(points, metric)
    s = _kernels.silhouette_samples(np.ascontiguousarray(dist), inv.astype(np.int64), uniq.size)
    s = np.clip(s, -1.0, 1.0)
    return Silhouette(s, float(s.mean()))


class SelectK(NamedTuple):
    best_k: int
    scores: dict
    results: dict


def select_k(points, k_min: int, k_max: int, metric: Metric | str = Metric.EUCLIDEAN,
             seed: int = 0, max_iter: int = 300, n_restarts: int = 10) -> SelectK:
    """Choose k in ``[k_min, k_max]`` by maximal mean silhouette (ties -> smaller k)."""
    metric = Metric(metric)
    x = _check_points(points, metric)
    n = x.shape[0]
    if not 2 <= k_min <= k_max <= n - 1:
        raise fail("KTooLarge", f"need 2 <= k_min <= k_max <= n-1, got {k_min}, {k_max}, n={n}")
    dist = pairwise(x, metric)
    scores, results = {}, {}
    best_k, best_s = None, -np.inf
    for k in range(k_min, k_max + 1):
        res = kmeans(x, k, metric, sub_seed(seed, k), max_iter, n_restarts)
        s = silhouette(x, res.assignment, metric, dist=dist).mean
        scores[k], results[k] = s, res
        if s > best_s:
            best_k, best_s = k, s
    return SelectK(best_k, scores, results)


def agglomerative(items, linkage: Linkage | str = Linkage.AVERAGE,
                  metric: Metric | str = Metric.EUCLIDEAN, precomputed: bool = False,
                  leaf_ids: Sequence | None = None) -> Dendrogram:
    """Agglomerative clustering; merges are ``(node_a, node_b, height)`` with a < b.

    Leaves are nodes ``0..R-1``; merge ``i`` creates node ``R + i``. Equal
    heights resolve to the lowest ``(node_a, node_b)`` pair.
    """
    linkage = Linkage(linkage)
    if precomputed:
        d = np.ascontiguousarray(items, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise fail("AsymmetricDistance", "distance matrix must be square")
        if not np.array_equal(d, d.T) or np.any(np.diag(d) != 0):
            raise fail("AsymmetricDistance", "distance matrix must be symmetric with zero diagonal")
    else:
        d = pairwise(items, metric)
    R = d.shape[0]
    if R < 2:
        raise fail("TooFewItems", "agglomerative clustering needs R >= 2")
    merges = _kernels.agglomerate(d, _kernels.LINKAGE_CODES[linkage.value])
    leaves = tuple(range(R)) if leaf_ids is None else tuple(leaf_ids)
    return Dendrogram(leaves, tuple((int(a), int(b), float(h)) for a, b, h in merges), linkage)
