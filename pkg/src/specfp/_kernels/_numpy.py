"""Vectorised numpy implementations of the hot kernels."""
import numpy as np

EUCLIDEAN, COSINE, SQEUCLIDEAN = 0, 1, 2
SINGLE, AVERAGE = 0, 1


def pairwise_distances(x, y, metric):
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if metric == COSINE:
        xn = x / np.linalg.norm(x, axis=1)[:, None]
        yn = y / np.linalg.norm(y, axis=1)[:, None]
        d = 1.0 - xn @ yn.T
        return np.clip(d, 0.0, 2.0)
    diff = x[:, None, :] - y[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    if metric == SQEUCLIDEAN:
        return sq
    return np.sqrt(sq)


def assign_nearest(x, centroids, metric):
    d = pairwise_distances(x, centroids, metric)
    labels = np.argmin(d, axis=1)  # first minimum -> lowest index
    return labels.astype(np.int64), d[np.arange(x.shape[0]), labels]


def silhouette_samples(dist, labels, n_clusters):
    n = dist.shape[0]
    onehot = np.zeros((n, n_clusters))
    onehot[np.arange(n), labels] = 1.0
    sizes = onehot.sum(axis=0)
    sums = dist @ onehot  # n x k: total distance to each cluster
    own = sizes[labels]
    a = np.where(own > 1, sums[np.arange(n), labels] / np.maximum(own - 1, 1), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        mean_other = sums / sizes[None, :]
    mean_other[np.arange(n), labels] = np.inf
    mean_other[:, sizes == 0] = np.inf
    b = mean_other.min(axis=1)
    denom = np.maximum(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 0, (b - a) / denom, 0.0)
    return np.where(own > 1, s, 0.0)


def agglomerate(dist, linkage):
    """Lance-Williams agglomeration; returns (R-1) x 3 array [a, b, height]."""
    r = dist.shape[0]
    d = np.array(dist, dtype=np.float64)
    np.fill_diagonal(d, np.inf)
    node = np.arange(r)
    size = np.ones(r)
    active = np.ones(r, dtype=bool)
    out = np.empty((r - 1, 3))
    for step in range(r - 1):
        masked = np.where(active[:, None] & active[None, :], d, np.inf)
        h = masked.min()
        ii, jj = np.nonzero(masked == h)
        # lowest pair of node indices among ties
        a_nodes = np.minimum(node[ii], node[jj])
        b_nodes = np.maximum(node[ii], node[jj])
        best = np.lexsort((b_nodes, a_nodes))[0]
        i, j = ii[best], jj[best]
        out[step] = (a_nodes[best], b_nodes[best], h)
        if linkage == SINGLE:
            new = np.minimum(d[i], d[j])
        else:
            new = (size[i] * d[i] + size[j] * d[j]) / (size[i] + size[j])
        d[i, :] = new
        d[:, i] = new
        d[i, i] = np.inf
        active[j] = False
        size[i] += size[j]
        node[i] = r + step
    return out
