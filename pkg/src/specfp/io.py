"""File formats.

Recording: JSON sidecar ``{subject_id, sample_rate_hz, channels, samples,
dtype: "f64le", layout: "channel-major"}`` plus ``<stem>.bin`` holding the
C x T matrix as little-endian float64, channel after channel.

SpatialFilter: JSON ``{subject_id, voxel_ids, rows, cols}`` plus ``<stem>.bin``
with the V x C weights in row-major little-endian float64.

Parcellation: JSON ``{name, rois: [{roi_id, roi_name, voxels}]}``.

Large stage matrices use the same sidecar-plus-binary scheme
(:func:`write_matrix` / :func:`read_matrix`).
"""
from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .errors import InputError, InputMissing
from .model import Parcellation, Recording, Roi, SpatialFilter

F64LE = np.dtype("<f8")


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, shortest round-trip float repr."""
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(dumps(obj))
    os.replace(tmp, path)


def read_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise InputMissing(str(path))
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: {e}", code="MalformedInput") from None


def _bin_path(json_path: Path) -> Path:
    return json_path.with_suffix(".bin")


def _write_bin(path: Path, arr: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(np.ascontiguousarray(arr, dtype=F64LE).tobytes())
    os.replace(tmp, path)


def _read_bin(path: Path, shape: tuple[int, ...]) -> np.ndarray:
    if not path.exists():
        raise InputMissing(str(path))
    raw = path.read_bytes()
    expected = int(np.prod(shape)) * 8
    if len(raw) != expected:
        raise InputError(f"{path}: {len(raw)} bytes, expected {expected}", code="MalformedInput")
    return np.frombuffer(raw, dtype=F64LE).astype(np.float64).reshape(shape)


def write_recording(path, rec: Recording) -> None:
    path = Path(path)
    _write_bin(_bin_path(path), rec.samples)
    write_json(path, {
        "subject_id": rec.subject_id,
        "sample_rate_hz": float(rec.sample_rate_hz),
        "channels": rec.channels,
        "samples": rec.n_samples,
        "dtype": "f64le",
        "layout": "channel-major",
    })


def read_recording_header(path) -> dict:
    meta = read_json(path)
    if meta.get("dtype") != "f64le" or meta.get("layout") != "channel-major":
        raise InputError(f"{path}: unsupported dtype/layout", code="MalformedInput")
    return meta


def read_recording(path) -> Recording:
    path = Path(path)
    meta = read_recording_header(path)
    x = _read_bin(_bin_path(path), (int(meta["channels"]), int(meta["samples"])))
    return Recording(meta["subject_id"], float(meta["sample_rate_hz"]), x)


def write_filter(path, filt: SpatialFilter) -> None:
    path = Path(path)
    _write_bin(_bin_path(path), filt.weights)
    write_json(path, {
        "subject_id": filt.subject_id,
        "voxel_ids": list(filt.voxel_ids),
        "rows": filt.weights.shape[0],
        "cols": filt.weights.shape[1],
    })


def read_filter(path) -> SpatialFilter:
    path = Path(path)
    meta = read_json(path)
    w = _read_bin(_bin_path(path), (int(meta["rows"]), int(meta["cols"])))
    return SpatialFilter(meta["subject_id"], tuple(meta["voxel_ids"]), w)


def parcellation_to_json(p: Parcellation) -> dict:
    return {
        "name": p.name,
        "rois": [{"roi_id": r.roi_id, "roi_name": r.roi_name, "voxels": list(r.voxels)}
                 for r in p.rois],
    }


def write_parcellation(path, p: Parcellation) -> None:
    write_json(path, parcellation_to_json(p))


def read_parcellation(path) -> Parcellation:
    meta = read_json(path)
    rois = tuple(Roi(int(r["roi_id"]), str(r.get("roi_name", "")), tuple(r["voxels"]))
                 for r in meta["rois"])
    return Parcellation(str(meta.get("name", "")), rois)


def write_matrix(path, arr: np.ndarray, **extra) -> None:
    path = Path(path)
    _write_bin(_bin_path(path), arr)
    write_json(path, {"shape": list(arr.shape), "dtype": "f64le", **extra})


def read_matrix(path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    meta = read_json(path)
    return _read_bin(_bin_path(path), tuple(meta["shape"])), meta
