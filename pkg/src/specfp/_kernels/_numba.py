"""numba versions of the hot kernels; loop order mirrors the numpy module."""
import numpy as np
from numba import njit

EUCLIDEAN, COSINE, SQEUCLIDEAN = 0, 1, 2
SINGLE, AVERAGE = 0, 1

_opts = dict(cache=True, nogil=True)


@njit(**_opts)
def _norms(x):
    n = x.shape[0]
    out = np.empty(n)
    for i in range(n):
        s = 0.0
        for f in range(x.shape[1]):
            s += x[i, f] * x[i, f]
        out[i] = np.sqrt(s)
    return out


@njit(**_opts)
def pairwise_distances(x, y, metric):
    n, m, nf = x.shape[0], y.shape[0], x.shape[1]
    out = np.empty((n, m))
    if metric == COSINE:
        nx = _norms(x)
        ny = _norms(y)
        xn = np.empty_like(x)
        yn = np.empty_like(y)
        for i in range(n):
            xn[i] = x[i] / nx[i]
        for j in range(m):
            yn[j] = y[j] / ny[j]
        g = np.dot(xn, np.ascontiguousarray(yn.T))
        for i in range(n):
            for j in range(m):
                out[i, j] = min(max(1.0 - g[i, j], 0.0), 2.0)
        return out
    for i in range(n):
        for j in range(m):
            s = 0.0
            for f in range(nf):
                t = x[i, f] - y[j, f]
                s += t * t
            out[i, j] = s if metric == SQEUCLIDEAN else np.sqrt(s)
    return out


@njit(**_opts)
def assign_nearest(x, centroids, metric):
    d = pairwise_distances(x, centroids, metric)
    n = x.shape[0]
    labels = np.empty(n, dtype=np.int64)
    best = np.empty(n)
    for i in range(n):
        bj = 0
        bd = d[i, 0]
        for j in range(1, d.shape[1]):
            if d[i, j] < bd:
                bd = d[i, j]
                bj = j
        labels[i] = bj
        best[i] = bd
    return labels, best


@njit(**_opts)
def silhouette_samples(dist, labels, n_clusters):
    n = dist.shape[0]
    sizes = np.zeros(n_clusters)
    for i in range(n):
        sizes[labels[i]] += 1.0
    out = np.zeros(n)
    sums = np.zeros(n_clusters)
    for i in range(n):
        own = labels[i]
        if sizes[own] <= 1.0:
            out[i] = 0.0
            continue
        sums[:] = 0.0
        for j in range(n):
            sums[labels[j]] += dist[i, j]
        a = sums[own] / (sizes[own] - 1.0)
        b = np.inf
        for c in range(n_clusters):
            if c != own and sizes[c] > 0:
                v = sums[c] / sizes[c]
                if v < b:
                    b = v
        denom = max(a, b)
        out[i] = (b - a) / denom if denom > 0 else 0.0
    return out


@njit(**_opts)
def agglomerate(dist, linkage):
    r = dist.shape[0]
    d = dist.copy()
    for i in range(r):
        d[i, i] = np.inf
    node = np.arange(r)
    size = np.ones(r)
    active = np.ones(r, dtype=np.bool_)
    out = np.empty((r - 1, 3))
    for step in range(r - 1):
        h = np.inf
        bi = -1
        bj = -1
        ba = r * 2 + 1
        bb = r * 2 + 1
        for i in range(r):
            if not active[i]:
                continue
            for j in range(i + 1, r):
                if not active[j]:
                    continue
                v = d[i, j]
                na = min(node[i], node[j])
                nb = max(node[i], node[j])
                if v < h or (v == h and (na < ba or (na == ba and nb < bb))):
                    h = v
                    bi = i
                    bj = j
                    ba = na
                    bb = nb
        out[step, 0] = ba
        out[step, 1] = bb
        out[step, 2] = h
        si = size[bi]
        sj = size[bj]
        for k in range(r):
            if linkage == SINGLE:
                nv = min(d[bi, k], d[bj, k])
            else:
                nv = (si * d[bi, k] + sj * d[bj, k]) / (si + sj)
            d[bi, k] = nv
            d[k, bi] = nv
        d[bi, bi] = np.inf
        active[bj] = False
        size[bi] = si + sj
        node[bi] = r + step
    return out
