"""Hot numerical kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``SPECFP_DISABLE_NUMBA`` is unset or ``0``. Both paths implement
identical tie-breaking; they may differ in the last few ulps because the
summation order differs.
"""
import os

from . import _numpy

METRIC_CODES = {"euclidean": _numpy.EUCLIDEAN, "cosine": _numpy.COSINE,
                "sqeuclidean": _numpy.SQEUCLIDEAN}
SQEUCLIDEAN = _numpy.SQEUCLIDEAN
LINKAGE_CODES = {"single": _numpy.SINGLE, "average": _numpy.AVERAGE}


def _want_numba() -> bool:
    return os.environ.get("SPECFP_DISABLE_NUMBA", "0").strip().lower() in ("", "0", "false", "no")


BACKEND = "numpy"
_impl = _numpy
if _want_numba():
    try:
        from . import _numba as _impl  # noqa: F811
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _impl = _numpy

pairwise_distances = _impl.pairwise_distances
assign_nearest = _impl.assign_nearest
silhouette_samples = _impl.silhouette_samples
agglomerate = _impl.agglomerate
