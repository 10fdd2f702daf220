"""Pipeline configuration: JSON schema, validation and hashing.

Example::

    {
      "data_dir": "data",
      "output_dir": "out",
      "subjects": null,
      "rois": null,
      "input": "recordings",
      "segment_length_ms": 1000,
      "frequency_axis": {"f_min": 1, "f_max": 40, "n_freqs": 30,
                         "spacing": "logarithmic", "snap": true},
      "window": "hann",
      "normalization": "whole_brain_ratio",
      "distance": "cosine",
      "k_mode": {"kind": "silhouette", "k_min": 2, "k_max": 6},
      "regularization_lambda": null,
      "master_seed": 0,
      "worker_count": 2,
      "subject_support_threshold": 5
    }

Relative paths resolve against the config file's directory. ``data_dir``
holds ``parcellation.json``, ``recordings/<subject>.json`` and
``filters/<subject>.json``.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigInvalid
from .model import (
    ClusterSettings, KMode, Linkage, Metric, Normalization, Spacing, Window,
)

MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class AxisParams:
    f_min: float = 1.0
    f_max: float = 40.0
    n_freqs: int = 30
    spacing: Spacing = Spacing.LOGARITHMIC
    snap: bool = True


@dataclass(frozen=True)
class WhiteNoiseParams:
    duration_s: float = 180.0
    sample_rate_hz: float = 256.0


@dataclass(frozen=True)
class PipelineConfig:
    data_dir: Path
    output_dir: Path
    segment_length_ms: float = 1000.0
    axis: AxisParams = field(default_factory=AxisParams)
    window: Window = Window.HANN
    normalization: Normalization = Normalization.WHOLE_BRAIN_RATIO
    clustering: ClusterSettings = field(default_factory=ClusterSettings)
    subjects: tuple[str, ...] | None = None
    rois: tuple[int, ...] | None = None
    input: str = "recordings"
    white_noise: WhiteNoiseParams = field(default_factory=WhiteNoiseParams)
    master_seed: int = 0
    worker_count: int = 1
    linkage: Linkage = Linkage.AVERAGE
    analyses: tuple[str, ...] = ("identification", "network", "normality")
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def distance(self) -> Metric:
        return self.clustering.distance

    @property
    def subject_support_threshold(self) -> int:
        return self.clustering.subject_support_threshold

    def with_overrides(self, output_dir=None, workers=None, seed=None) -> "PipelineConfig":
        raw = dict(self.raw)
        kw = {}
        if output_dir is not None:
            kw["output_dir"] = Path(output_dir)
        if workers is not None:
            kw["worker_count"] = _positive_int("worker_count", workers)
        if seed is not None:
            s = _seed(seed)
            kw["master_seed"] = s
            raw["master_seed"] = s
        return replace(self, raw=raw, **kw)

    def hash(self) -> str:
        """SHA-256 of the canonical config, ignoring scheduling and output location."""
        body = {k: v for k, v in self.raw.items() if k not in ("worker_count", "output_dir")}
        body["master_seed"] = self.master_seed
        text = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _positive_int(name, v) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ConfigInvalid(name, f"must be a positive integer, got {v!r}")
    return v


def _positive(name, v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
        raise ConfigInvalid(name, f"must be a positive number, got {v!r}")
    return float(v)


def _seed(v) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v <= MASK64:
        raise ConfigInvalid("master_seed", "must be an unsigned 64-bit integer")
    return v


def _enum(name, cls, v):
    try:
        return cls(v)
    except ValueError:
        raise ConfigInvalid(name, f"must be one of {[e.value for e in cls]}, got {v!r}") from None


def _kmode(name, d) -> KMode:
    if not isinstance(d, dict):
        raise ConfigInvalid(name, "must be an object")
    kind = d.get("kind")
    if kind == "fixed":
        return KMode.fixed(_positive_int(f"{name}.k", d.get("k")))
    if kind == "silhouette":
        k_min = _positive_int(f"{name}.k_min", d.get("k_min", 2))
        k_max = _positive_int(f"{name}.k_max", d.get("k_max", 6))
        if k_min < 2:
            raise ConfigInvalid(f"{name}.k_min", "must be >= 2 in silhouette mode")
        if k_max < k_min:
            raise ConfigInvalid(f"{name}.k_max", "must be >= k_min")
        return KMode.silhouette(k_min, k_max)
    raise ConfigInvalid(f"{name}.kind", f"must be 'fixed' or 'silhouette', got {kind!r}")


_KNOWN = {
    "data_dir", "output_dir", "subjects", "rois", "input", "white_noise", "segment_length_ms",
    "frequency_axis", "window", "normalization", "distance", "k_mode", "group_k_mode",
    "regularization_lambda", "n_restarts", "max_iter", "gmm_max_iter", "gmm_tol",
    "master_seed", "worker_count", "subject_support_threshold", "linkage", "analyses",
}


def parse_config(raw: dict, base_dir: Path | str = ".") -> PipelineConfig:
    if not isinstance(raw, dict):
        raise ConfigInvalid("<root>", "config must be a JSON object")
    unknown = set(raw) - _KNOWN
    if unknown:
        raise ConfigInvalid(sorted(unknown)[0], "unknown field")
    base = Path(base_dir)
    if "data_dir" not in raw:
        raise ConfigInvalid("data_dir", "required")
    data_dir = (base / raw["data_dir"]).resolve()
    output_dir = (base / raw.get("output_dir", "out")).resolve()

    ax = raw.get("frequency_axis", {})
    if not isinstance(ax, dict):
        raise ConfigInvalid("frequency_axis", "must be an object")
    axis = AxisParams(
        f_min=_positive("frequency_axis.f_min", ax.get("f_min", 1.0)),
        f_max=_positive("frequency_axis.f_max", ax.get("f_max", 40.0)),
        n_freqs=_positive_int("frequency_axis.n_freqs", ax.get("n_freqs", 30)),
        spacing=_enum("frequency_axis.spacing", Spacing, ax.get("spacing", "logarithmic")),
        snap=bool(ax.get("snap", True)),
    )
    if axis.f_min >= axis.f_max:
        raise ConfigInvalid("frequency_axis.f_max", "must exceed f_min")
    if axis.n_freqs < 2:
        raise ConfigInvalid("frequency_axis.n_freqs", "must be >= 2")

    lam = raw.get("regularization_lambda")
    if lam is not None and (isinstance(lam, bool) or not isinstance(lam, (int, float)) or lam < 0):
        raise ConfigInvalid("regularization_lambda", "must be null or a non-negative number")
    k_mode = _kmode("k_mode", raw.get("k_mode", {"kind": "silhouette"}))
    group_k = raw.get("group_k_mode")
    clustering = ClusterSettings(
        distance=_enum("distance", Metric, raw.get("distance", "cosine")),
        k_mode=k_mode,
        group_k_mode=_kmode("group_k_mode", group_k) if group_k is not None else None,
        regularization_lambda=None if lam is None else float(lam),
        n_restarts=_positive_int("n_restarts", raw.get("n_restarts", 10)),
        max_iter=_positive_int("max_iter", raw.get("max_iter", 300)),
        gmm_max_iter=_positive_int("gmm_max_iter", raw.get("gmm_max_iter", 200)),
        gmm_tol=_positive("gmm_tol", raw.get("gmm_tol", 1e-8)),
        subject_support_threshold=_positive_int(
            "subject_support_threshold", raw.get("subject_support_threshold", 5)),
    )

    subjects = raw.get("subjects")
    if subjects is not None:
        if not isinstance(subjects, list) or not subjects or not all(isinstance(s, str) for s in subjects):
            raise ConfigInvalid("subjects", "must be null or a non-empty list of subject ids")
        if len(set(subjects)) != len(subjects):
            raise ConfigInvalid("subjects", "duplicate subject id")
        subjects = tuple(subjects)
    rois = raw.get("rois")
    if rois is not None:
        if not isinstance(rois, list) or not rois or not all(isinstance(r, int) for r in rois):
            raise ConfigInvalid("rois", "must be null or a non-empty list of integer roi ids")
        rois = tuple(sorted(set(rois)))

    input_kind = raw.get("input", "recordings")
    if input_kind not in ("recordings", "white_noise"):
        raise ConfigInvalid("input", "must be 'recordings' or 'white_noise'")
    wn = raw.get("white_noise", {})
    white_noise = WhiteNoiseParams(
        duration_s=_positive("white_noise.duration_s", wn.get("duration_s", 180.0)),
        sample_rate_hz=_positive("white_noise.sample_rate_hz", wn.get("sample_rate_hz", 256.0)),
    )
    analyses = raw.get("analyses", ["identification", "network", "normality"])
    bad = set(analyses) - {"identification", "network", "normality"}
    if bad:
        raise ConfigInvalid("analyses", f"unknown analysis {sorted(bad)[0]!r}")

    workers = _positive_int("worker_count", raw.get("worker_count", 1))
    env = os.environ.get("TOFFI_WORKERS")
    if env:
        try:
            workers = _positive_int("TOFFI_WORKERS", int(env))
        except ValueError:
            raise ConfigInvalid("TOFFI_WORKERS", f"not an integer: {env!r}") from None

    return PipelineConfig(
        data_dir=data_dir,
        output_dir=output_dir,
        segment_length_ms=_positive("segment_length_ms", raw.get("segment_length_ms", 1000.0)),
        axis=axis,
        window=_enum("window", Window, raw.get("window", "hann")),
        normalization=_enum("normalization", Normalization,
                            raw.get("normalization", "whole_brain_ratio")),
        clustering=clustering,
        subjects=subjects,
        rois=rois,
        input=input_kind,
        white_noise=white_noise,
        master_seed=_seed(raw.get("master_seed", 0)),
        worker_count=workers,
        linkage=_enum("linkage", Linkage, raw.get("linkage", "average")),
        analyses=tuple(sorted(set(analyses))),
        raw=dict(raw),
    )


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        from .errors import InputMissing
        raise InputMissing(f"config file {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigInvalid("<file>", f"invalid JSON: {e}") from None
    return parse_config(raw, path.parent)
