"""In-memory path from a synthetic dataset to per-ROI individual centroids."""
from specfp.fingerprint import SubjectCentroids, individual_fingerprint
from specfp.model import ClusterSettings, KMode
from specfp.seeding import SEGMENT_KMEANS, derive_seed
from specfp.source import roi_segment_spectra
from specfp.spectra import make_frequency_axis, normalize_spectra, segment_signal


def demo_axis(fs=256.0, L=256):
    return make_frequency_axis(1, 40, 30, "logarithmic", fs, L)


def demo_settings(**kw):
    base = dict(distance="cosine", k_mode=KMode.silhouette(2, 5))
    base.update(kw)
    return ClusterSettings(**base)


def centroid_dataset(ds, axis=None, settings=None, seed=0, window="rectangular"):
    """roi_id -> [SubjectCentroids, ...] in subject order."""
    axis = axis or demo_axis(ds.ground_truth["fs"], ds.ground_truth["L"])
    settings = settings or demo_settings()
    out = {rid: [] for rid in ds.parcellation.roi_ids}
    for si, (rec, filt) in enumerate(zip(ds.recordings, ds.filters)):
        seg = segment_signal(rec, 1000.0 * ds.ground_truth["L"] / ds.ground_truth["fs"])
        spectra = roi_segment_spectra(seg.segments, filt, ds.parcellation, axis, window,
                                      rec.sample_rate_hz)
        norm = normalize_spectra(spectra)
        for ri, rid in enumerate(ds.parcellation.roi_ids):
            fp = individual_fingerprint(norm[rid], settings,
                                        derive_seed(seed, 3, si, ri, SEGMENT_KMEANS))
            out[rid].append(SubjectCentroids(si, fp.centroids, fp.durations))
    return out
