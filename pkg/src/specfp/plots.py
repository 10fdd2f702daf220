"""Plot-ready data files derived from stage artifacts (no rendering).

Written under ``<output_dir>/plots/``:

* ``fingerprints/roi-<id>.csv`` -- frequency, mode, mean, lower, upper
  (mean -/+ one standard deviation) and ``fingerprints/roi-<id>.json`` with
  per-mode duration, subject support and support flag.
* ``confusion.csv`` (R x R counts, header and first column are roi ids) and
  ``accuracy_per_fold.csv``.
* ``dendrogram.json`` -- leaf ids and ``[node_a, node_b, height]`` merges.
* ``silhouette_curves.csv`` -- subject, roi, k, mean silhouette.
"""
from __future__ import annotations

import csv
import io as _io
from pathlib import Path

from . import io
from .errors import ArtifactMissing, ConfigInvalid
from .fingerprint import mode_sigma_band
from .pipeline import STAGES, load_fingerprints

KINDS = ("fingerprints", "confusion", "dendrogram", "silhouette_curves")


def _write_csv(path: Path, header, rows) -> None:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue())


def _fingerprints(out: Path, dest: Path) -> list[Path]:
    axis, fps, raw = load_fingerprints(out)
    thr = raw.get("subject_support_threshold", 5)
    written = []
    for fp, meta in zip(fps, raw["fingerprints"]):
        rows = []
        for j, m in enumerate(fp.modes):
            upper, lower = mode_sigma_band(m)
            for f, mu, lo, hi in zip(axis.frequencies_hz, m.mean, lower, upper):
                rows.append([repr(float(f)), j, repr(float(mu)), repr(float(lo)), repr(float(hi))])
        p = dest / "fingerprints" / f"roi-{fp.roi_id}.csv"
        _write_csv(p, ["frequency", "mode", "mean", "lower", "upper"], rows)
        j = dest / "fingerprints" / f"roi-{fp.roi_id}.json"
        io.write_json(j, {
            "roi_id": fp.roi_id,
            "roi_name": meta.get("roi_name", ""),
            "subject_support_threshold": thr,
            "modes": [{
                "mode": i,
                "weight": m.weight,
                "duration_percent": m.duration_percent,
                "subject_support": m.subject_support,
                "supported": m.subject_support >= thr,
                "peak_frequency_hz": m.peak_frequency_hz,
            } for i, m in enumerate(fp.modes)],
        })
        written += [p, j]
    return written


def _confusion(out: Path, dest: Path) -> list[Path]:
    src = out / STAGES[4] / "identification.json"
    if not src.exists():
        raise ArtifactMissing(str(src))
    d = io.read_json(src)
    ids = d["roi_ids"]
    p = dest / "confusion.csv"
    _write_csv(p, ["true\\predicted", *ids], [[rid, *row] for rid, row in zip(ids, d["counts"])])
    q = dest / "accuracy_per_fold.csv"
    _write_csv(q, ["fold", "held_out_subject", "accuracy"],
               [[i, s, repr(a)] for i, (s, a) in
                enumerate(zip(d["held_out_subjects"], d["accuracy_per_fold"]))])
    return [p, q]


def _dendrogram(out: Path, dest: Path) -> list[Path]:
    src = out / STAGES[4] / "network.json"
    if not src.exists():
        raise ArtifactMissing(str(src))
    d = io.read_json(src)
    p = dest / "dendrogram.json"
    io.write_json(p, {"leaf_ids": d["leaf_ids"], "linkage": d["linkage"], "merges": d["merges"]})
    return [p]


def _silhouette(out: Path, dest: Path) -> list[Path]:
    sdir = out / STAGES[2]
    files = sorted(f for f in sdir.glob("*.json") if f.name != "manifest.json") if sdir.exists() else []
    if not files:
        raise ArtifactMissing(str(sdir))
    rows = []
    for f in files:
        d = io.read_json(f)
        for roi in d["rois"]:
            for k, s in sorted(roi["silhouette"].items(), key=lambda kv: int(kv[0])):
                rows.append([d["subject_id"], roi["roi_id"], int(k), repr(float(s))])
    p = dest / "silhouette_curves.csv"
    _write_csv(p, ["subject_id", "roi_id", "k", "mean_silhouette"], rows)
    return [p]


_EMITTERS = {"fingerprints": _fingerprints, "confusion": _confusion,
             "dendrogram": _dendrogram, "silhouette_curves": _silhouette}


def emit_plot_data(output_dir, what: str) -> list[Path]:
    if what not in _EMITTERS:
        raise ConfigInvalid("what", f"must be one of {list(KINDS)}")
    out = Path(output_dir)
    return _EMITTERS[what](out, out / "plots")
