"""Five-stage, resumable, seeded pipeline.

Stages and their artifact directories under the output directory:

=====  ==================  ================================================
S1     ``s1_roi_spectra``  segment, reconstruct sources, per-ROI power
S2     ``s2_normalized``   whole-brain ratio normalisation, ROI subsetting
S3     ``s3_individual``   per (subject, ROI) clustering of segment spectra
S4     ``s4_group``        per-ROI group fingerprints (regularised GMM)
S5     ``s5_analysis``     identification, network analysis, normality
=====  ==================  ================================================

Each stage directory ends with ``manifest.json`` carrying the config hash;
a stage is reused only when its manifest exists with a matching hash and no
earlier stage was recomputed in the same run. Downstream stages always read
their inputs back from disk, so resumed and clean runs see identical bytes.
"""
from __future__ import annotations

import logging
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .analysis import (
    fingerprint_distance_matrix, hz_normality_test, loo_cross_validation, network_analysis,
)
from .config import PipelineConfig
from .errors import ArtifactMissing, ConfigInvalid, InputError, InputMissing, SpecFPError, StageFailed
from .fingerprint import SubjectCentroids, group_fingerprint, individual_fingerprint
from .model import (
    Fingerprint, FrequencyAxis, Normalization, Parcellation, SpectralMode,
)
from .seeding import GROUP_GMM, LOO_FOLD, SEGMENT_KMEANS, WHITE_NOISE, derive_seed
from .source import roi_segment_spectra, white_noise_recording
from .spectra import make_frequency_axis, segment_length, segment_signal, whole_brain_reference

log = logging.getLogger(__name__)

STAGES = ("s1_roi_spectra", "s2_normalized", "s3_individual", "s4_group", "s5_analysis")
STAGE_ALIASES = {f"s{i + 1}": name for i, name in enumerate(STAGES)}
MANIFEST = "manifest.json"


def stage_name(s: str) -> str:
    s = s.lower()
    if s in STAGES:
        return s
    if s in STAGE_ALIASES:
        return STAGE_ALIASES[s]
    raise ConfigInvalid("--stage", f"unknown stage {s!r}; use one of {list(STAGE_ALIASES)}")


@dataclass
class Inputs:
    subjects: list[str]
    parcellation: Parcellation
    roi_ids: list[int]  # ROIs fingerprinted (after subsetting)
    sample_rate_hz: float
    L: int
    axis: FrequencyAxis


def _recording_path(cfg, sid):
    return cfg.data_dir / "recordings" / f"{sid}.json"


def _filter_path(cfg, sid):
    return cfg.data_dir / "filters" / f"{sid}.json"


def resolve_inputs(cfg: PipelineConfig) -> Inputs:
    """Check that inputs exist and agree with the config; build the frequency axis."""
    ppath = cfg.data_dir / "parcellation.json"
    if not ppath.exists():
        raise InputMissing(str(ppath))
    parcellation = io.read_parcellation(ppath)
    if cfg.subjects is not None:
        subjects = list(cfg.subjects)
    else:
        fdir = cfg.data_dir / "filters"
        subjects = sorted(p.stem for p in fdir.glob("*.json")) if fdir.exists() else []
    if not subjects:
        raise InputMissing(f"no subjects found under {cfg.data_dir}")

    rates = []
    for sid in subjects:
        if not _filter_path(cfg, sid).exists():
            raise InputMissing(str(_filter_path(cfg, sid)))
        if cfg.input == "recordings":
            rp = _recording_path(cfg, sid)
            if not rp.exists():
                raise InputMissing(str(rp))
            rates.append(float(io.read_recording_header(rp)["sample_rate_hz"]))
        else:
            rates.append(cfg.white_noise.sample_rate_hz)
    if len(set(rates)) != 1:
        raise ConfigInvalid("subjects", "all subjects must share one sample rate")
    fs = rates[0]
    if cfg.axis.f_max >= fs / 2:
        raise ConfigInvalid("frequency_axis.f_max",
                            f"NyquistViolation: f_max={cfg.axis.f_max} >= fs/2={fs / 2}")
    L = segment_length(cfg.segment_length_ms, fs)
    if L < 2:
        raise ConfigInvalid("segment_length_ms", f"SegmentTooShort: {L} samples")
    try:
        axis = make_frequency_axis(cfg.axis.f_min, cfg.axis.f_max, cfg.axis.n_freqs,
                                   cfg.axis.spacing, fs, L, cfg.axis.snap)
    except InputError as e:
        raise ConfigInvalid("frequency_axis", str(e)) from None

    all_ids = parcellation.roi_ids
    if cfg.rois is not None:
        missing = [r for r in cfg.rois if r not in all_ids]
        if missing:
            raise ConfigInvalid("rois", f"roi {missing[0]} not in parcellation")
        roi_ids = list(cfg.rois)
    else:
        roi_ids = sorted(all_ids)
    return Inputs(subjects, parcellation, roi_ids, fs, L, axis)


# ------------------------------------------------------------------ helpers

def axis_to_json(axis: FrequencyAxis) -> dict:
    return {"frequencies_hz": axis.frequencies_hz.tolist(), "spacing": axis.spacing.value,
            "bin_snapped": axis.bin_snapped}


def axis_from_json(d: dict) -> FrequencyAxis:
    return FrequencyAxis(np.array(d["frequencies_hz"]), d["spacing"], bool(d["bin_snapped"]))


def fingerprint_to_json(fp: Fingerprint, threshold: int) -> dict:
    return {
        "roi_id": fp.roi_id,
        "modes": [{
            "mean": m.mean.tolist(),
            "covariance": m.covariance.tolist(),
            "weight": m.weight,
            "duration_percent": m.duration_percent,
            "subject_support": m.subject_support,
            "supported": m.subject_support >= threshold,
            "peak_frequency_hz": m.peak_frequency_hz,
        } for m in fp.modes],
    }


def fingerprint_from_json(d: dict, axis: FrequencyAxis) -> Fingerprint:
    modes = tuple(SpectralMode(np.array(m["mean"]), np.array(m["covariance"]), m["weight"],
                               m["duration_percent"], m["subject_support"], m["peak_frequency_hz"])
                  for m in d["modes"])
    return Fingerprint(int(d["roi_id"]), modes, axis)


def load_fingerprints(out: Path) -> tuple[FrequencyAxis, list[Fingerprint], dict]:
    path = Path(out) / "s4_group" / "fingerprints.json"
    if not path.exists():
        raise ArtifactMissing(str(path))
    d = io.read_json(path)
    axis = axis_from_json(d["axis"])
    return axis, [fingerprint_from_json(f, axis) for f in d["fingerprints"]], d


def load_individual(out: Path, subjects: list[str]) -> dict:
    """roi_id -> [SubjectCentroids] in subject order, read from S3 artifacts."""
    dataset: dict[int, list[SubjectCentroids]] = {}
    for si, sid in enumerate(subjects):
        d = io.read_json(Path(out) / "s3_individual" / f"{sid}.json")
        for roi in d["rois"]:
            dataset.setdefault(int(roi["roi_id"]), []).append(
                SubjectCentroids(si, np.array(roi["centroids"]), np.array(roi["durations"])))
    return dict(sorted(dataset.items()))


def stage_complete(out: Path, stage: str, config_hash: str) -> bool:
    m = Path(out) / stage / MANIFEST
    if not m.exists():
        return False
    try:
        return io.read_json(m).get("config_hash") == config_hash
    except SpecFPError:
        return False


def clean(out: Path, from_stage: str | None = None) -> list[str]:
    """Delete stage artifacts from ``from_stage`` onward (all stages by default)."""
    start = STAGES.index(stage_name(from_stage)) if from_stage else 0
    removed = []
    for s in STAGES[start:]:
        p = Path(out) / s
        if p.exists():
            shutil.rmtree(p)
            removed.append(s)
    if from_stage is None and (Path(out) / "plots").exists():
        shutil.rmtree(Path(out) / "plots")
        removed.append("plots")
    return removed


class _Pool:
    def __init__(self, workers: int):
        self.workers = workers
        self._ex = ThreadPoolExecutor(workers) if workers > 1 else None

    def map(self, fn, items):
        items = list(items)
        if self._ex is None:
            return [fn(i) for i in items]
        return list(self._ex.map(fn, items))

    def close(self):
        if self._ex is not None:
            self._ex.shutdown()


# ------------------------------------------------------------------- stages

def _s1(cfg: PipelineConfig, inp: Inputs, out: Path, pool: _Pool) -> dict:
    d = out / STAGES[0]

    def task(si):
        sid = inp.subjects[si]
        filt = io.read_filter(_filter_path(cfg, sid))
        if cfg.input == "recordings":
            rec = io.read_recording(_recording_path(cfg, sid))
        else:
            n = int(round(cfg.white_noise.duration_s * inp.sample_rate_hz))
            rec = white_noise_recording(sid, filt.weights.shape[1], n, inp.sample_rate_hz,
                                        derive_seed(cfg.master_seed, 1, si, 0, WHITE_NOISE))
        segs = segment_signal(rec, cfg.segment_length_ms)
        spectra = roi_segment_spectra(segs.segments, filt, inp.parcellation, inp.axis,
                                      cfg.window, rec.sample_rate_hz)
        ids = inp.parcellation.roi_ids
        io.write_matrix(d / f"{sid}.json", np.stack([spectra[r] for r in ids]),
                        subject_id=sid, roi_ids=ids)
        return segs.n_segments

    counts = pool.map(task, range(len(inp.subjects)))
    return {"n_segments": dict(zip(inp.subjects, counts)), "roi_ids": inp.parcellation.roi_ids}


def _s2(cfg: PipelineConfig, inp: Inputs, out: Path, pool: _Pool) -> dict:
    src, d = out / STAGES[0], out / STAGES[1]

    def task(si):
        sid = inp.subjects[si]
        x, meta = io.read_matrix(src / f"{sid}.json")
        all_ids = meta["roi_ids"]
        per_roi = {rid: x[i] for i, rid in enumerate(all_ids)}
        keep = np.stack([per_roi[r] for r in inp.roi_ids])
        if cfg.normalization is Normalization.WHOLE_BRAIN_RATIO:
            ref = whole_brain_reference(per_roi)
            if np.any(ref <= 0):
                raise InputError(f"subject {sid}: whole-brain reference is zero", code="ZeroReference")
            keep = keep / ref
        else:
            ref = np.ones(x.shape[-1])
        io.write_matrix(d / f"{sid}.json", keep, subject_id=sid, roi_ids=inp.roi_ids,
                        reference=ref.tolist())

    pool.map(task, range(len(inp.subjects)))
    return {"roi_ids": inp.roi_ids}


def _s3(cfg: PipelineConfig, inp: Inputs, out: Path, pool: _Pool) -> dict:
    src, d = out / STAGES[1], out / STAGES[2]
    settings = cfg.clustering
    spectra = {sid: io.read_matrix(src / f"{sid}.json")[0] for sid in inp.subjects}
    tasks = [(si, ri) for si in range(len(inp.subjects)) for ri in range(len(inp.roi_ids))]

    def task(t):
        si, ri = t
        res = individual_fingerprint(spectra[inp.subjects[si]][ri], settings,
                                     derive_seed(cfg.master_seed, 3, si, ri, SEGMENT_KMEANS))
        return {
            "roi_id": inp.roi_ids[ri],
            "k": int(res.centroids.shape[0]),
            "centroids": res.centroids.tolist(),
            "durations": res.durations.tolist(),
            "assignment": res.assignment.tolist(),
            "silhouette": {str(k): v for k, v in res.silhouette_scores.items()},
        }

    results = pool.map(task, tasks)
    R = len(inp.roi_ids)
    for si, sid in enumerate(inp.subjects):
        io.write_json(d / f"{sid}.json", {"subject_id": sid, "rois": results[si * R:(si + 1) * R]})
    return {"subjects": inp.subjects}


def _s4(cfg: PipelineConfig, inp: Inputs, out: Path, pool: _Pool) -> dict:
    dataset = load_individual(out, inp.subjects)
    names = {r.roi_id: r.roi_name for r in inp.parcellation.rois}

    def task(ri):
        rid = inp.roi_ids[ri]
        return group_fingerprint(rid, dataset[rid], inp.axis, cfg.clustering,
                                 derive_seed(cfg.master_seed, 4, 0, ri, GROUP_GMM))

    fps = pool.map(task, range(len(inp.roi_ids)))
    thr = cfg.subject_support_threshold
    body = {
        "axis": axis_to_json(inp.axis),
        "subjects": inp.subjects,
        "subject_support_threshold": thr,
        "fingerprints": [dict(fingerprint_to_json(fp, thr), roi_name=names[fp.roi_id]) for fp in fps],
    }
    io.write_json(out / STAGES[3] / "fingerprints.json", body)
    return {"n_fingerprints": len(fps)}


def _s5(cfg: PipelineConfig, inp: Inputs, out: Path, pool: _Pool) -> dict:
    d = out / STAGES[4]
    axis, fps, _ = load_fingerprints(out)
    summary = {}
    if "identification" in cfg.analyses:
        if len(inp.subjects) >= 3:
            dataset = load_individual(out, inp.subjects)
            res = loo_cross_validation(dataset, axis, cfg.clustering,
                                       derive_seed(cfg.master_seed, 5, 0, 0, LOO_FOLD),
                                       map_fn=pool.map)
            io.write_json(d / "identification.json", {
                "roi_ids": list(res.confusion.roi_ids),
                "counts": res.confusion.counts.tolist(),
                "n_iterations": res.confusion.n_iterations,
                "accuracy_per_fold": res.accuracy_per_fold,
                "mean_accuracy": res.mean_accuracy,
                "held_out_subjects": inp.subjects,
                "individual_winners": [{str(k): v for k, v in w.items()} for w in res.winners],
            })
            summary["mean_accuracy"] = res.mean_accuracy
        else:
            summary["identification"] = "skipped: fewer than 3 subjects"
    if "network" in cfg.analyses:
        if len(fps) >= 2:
            dist = fingerprint_distance_matrix(fps, cfg.distance)
            dend = network_analysis(fps, cfg.linkage, cfg.distance)
            io.write_json(d / "network.json", {
                "leaf_ids": list(dend.leaf_ids),
                "linkage": dend.linkage.value,
                "metric": cfg.distance.value,
                "merges": [list(m) for m in dend.merges],
                "distance_matrix": dist.tolist(),
            })
        else:
            summary["network"] = "skipped: fewer than 2 ROIs"
    if "normality" in cfg.analyses:
        io.write_json(d / "normality.json", {"tests": _normality(inp, out)})
    return summary


def _normality(inp: Inputs, out: Path) -> list:
    """HZ test on the segment spectra of every individual cluster with n > F + 1."""
    tests = []
    F = len(inp.axis)
    for sid in inp.subjects:
        x, _ = io.read_matrix(out / STAGES[1] / f"{sid}.json")
        ind = io.read_json(out / STAGES[2] / f"{sid}.json")
        for ri, roi in enumerate(ind["rois"]):
            labels = np.array(roi["assignment"])
            for j in range(roi["k"]):
                pts = x[ri][labels == j]
                entry = {"subject_id": sid, "roi_id": roi["roi_id"], "cluster": j, "n": int(pts.shape[0])}
                if pts.shape[0] <= F + 1:
                    entry["skipped"] = "n <= F + 1"
                else:
                    try:
                        r = hz_normality_test(pts, 0.05)
                        entry.update(statistic=r.statistic, p_value=r.p_value, reject=bool(r.reject))
                    except InputError as e:
                        entry["skipped"] = e.code
                tests.append(entry)
    return tests


_RUNNERS = {STAGES[0]: _s1, STAGES[1]: _s2, STAGES[2]: _s3, STAGES[3]: _s4, STAGES[4]: _s5}


@dataclass
class RunReport:
    output_dir: Path
    computed: list
    reused: list
    summaries: dict


def run_pipeline(cfg: PipelineConfig, until: str | None = None) -> RunReport:
    """Run stages S1..``until`` (default S5), reusing up-to-date artifacts."""
    inp = resolve_inputs(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    last = STAGES.index(stage_name(until)) if until else len(STAGES) - 1
    h = cfg.hash()
    pool = _Pool(cfg.worker_count)
    computed, reused, summaries = [], [], {}
    dirty = False
    try:
        for stage in STAGES[: last + 1]:
            if not dirty and stage_complete(out, stage, h):
                log.info("%s: reusing artifact", stage)
                reused.append(stage)
                continue
            if not dirty:
                # downstream artifacts are stale once any stage recomputes
                clean(out, stage)
                dirty = True
            sdir = out / stage
            sdir.mkdir(parents=True)
            log.info("%s: computing", stage)
            try:
                summary = _RUNNERS[stage](cfg, inp, out, pool)
            except (ConfigInvalid, InputMissing):
                raise
            except InputError as e:
                if e.code != "MalformedInput":
                    raise StageFailed(stage, e) from e
                raise
            except Exception as e:
                raise StageFailed(stage, e) from e
            io.write_json(sdir / MANIFEST, {"stage": stage, "config_hash": h, "summary": summary})
            computed.append(stage)
            summaries[stage] = summary
    finally:
        pool.close()
    return RunReport(out, computed, reused, summaries)
