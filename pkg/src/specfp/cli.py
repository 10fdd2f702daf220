"""Command line interface.

    specfp run --config cfg.json [--out DIR] [--workers N] [--stage s3] [--seed-override S]
    specfp validate --config cfg.json
    specfp emit-plots --out DIR [--what fingerprints ...]
    specfp synth --out DIR [--preset planted|homologue] [--seed S]
    specfp clean --out DIR [--stage s4]

Exit codes: 0 success, 2 config error, 3 input error, 4 stage failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io
from .config import load_config
from .errors import ArtifactMissing, ConfigInvalid, InputError, InputMissing, StageFailed
from .pipeline import clean, resolve_inputs, run_pipeline
from .plots import KINDS, emit_plot_data
from .synth import PlantedMode, RoiSpec, example_specs, homologue_pair_dataset, planted_modes_dataset

EXIT_OK, EXIT_CONFIG, EXIT_INPUT, EXIT_STAGE = 0, 2, 3, 4

log = logging.getLogger("specfp")


def write_dataset(ds, data_dir: Path) -> None:
    data_dir = Path(data_dir)
    io.write_parcellation(data_dir / "parcellation.json", ds.parcellation)
    for rec in ds.recordings:
        io.write_recording(data_dir / "recordings" / f"{rec.subject_id}.json", rec)
    for f in ds.filters:
        io.write_filter(data_dir / "filters" / f"{f.subject_id}.json", f)


def demo_config(**overrides) -> dict:
    cfg = {
        "data_dir": "data",
        "output_dir": "out",
        "segment_length_ms": 1000,
        "frequency_axis": {"f_min": 1, "f_max": 40, "n_freqs": 30,
                           "spacing": "logarithmic", "snap": True},
        "window": "rectangular",
        "normalization": "whole_brain_ratio",
        "distance": "cosine",
        "k_mode": {"kind": "silhouette", "k_min": 2, "k_max": 5},
        "master_seed": 42,
        "worker_count": 1,
        "subject_support_threshold": 5,
        "linkage": "average",
    }
    cfg.update(overrides)
    return cfg


def _cmd_run(args) -> int:
    cfg = load_config(args.config).with_overrides(args.out, args.workers, args.seed_override)
    report = run_pipeline(cfg, args.stage)
    print(f"output: {report.output_dir}")
    print(f"computed: {', '.join(report.computed) or '-'}; reused: {', '.join(report.reused) or '-'}")
    for stage, summary in report.summaries.items():
        if summary:
            print(f"{stage}: {summary}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    inp = resolve_inputs(cfg)
    print(f"ok: {len(inp.subjects)} subjects, {len(inp.roi_ids)} ROIs, "
          f"{len(inp.axis)} frequencies, fs={inp.sample_rate_hz} Hz, L={inp.L}")
    return EXIT_OK


def _cmd_emit(args) -> int:
    out = Path(args.out) if args.out else load_config(args.config).output_dir
    for what in args.what or KINDS:
        for p in emit_plot_data(out, what):
            print(p)
    return EXIT_OK


def _cmd_synth(args) -> int:
    out = Path(args.out)
    specs = example_specs()
    if args.preset == "homologue":
        shared = RoiSpec("superior-temporal",
                         (PlantedMode(((10.0, 1.0),), 0.6), PlantedMode(((21.0, 1.0),), 0.4)))
        ds = homologue_pair_dataset(shared, specs[1:], args.subjects, args.segments,
                                    noise_sigma=args.noise, seed=args.seed)
    else:
        ds = planted_modes_dataset(specs, args.subjects, args.segments, noise_sigma=args.noise,
                                   seed=args.seed)
    write_dataset(ds, out / "data")
    io.write_json(out / "config.json", demo_config(master_seed=args.seed))
    print(f"wrote {len(ds.recordings)} subjects to {out / 'data'}; config at {out / 'config.json'}")
    return EXIT_OK


def _cmd_clean(args) -> int:
    out = Path(args.out) if args.out else load_config(args.config).output_dir
    removed = clean(out, args.stage)
    print("removed: " + (", ".join(removed) or "nothing"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specfp", description="Spectral fingerprinting pipeline")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the pipeline")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.add_argument("--workers", type=int)
    r.add_argument("--stage", help="last stage to run (s1..s5)")
    r.add_argument("--seed-override", type=int)
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("validate", help="check config and inputs")
    v.add_argument("--config", required=True)
    v.set_defaults(func=_cmd_validate)

    e = sub.add_parser("emit-plots", help="write plot-ready CSV/JSON")
    e.add_argument("--out")
    e.add_argument("--config")
    e.add_argument("--what", action="append", choices=KINDS)
    e.set_defaults(func=_cmd_emit)

    s = sub.add_parser("synth", help="write a synthetic planted-modes dataset and config")
    s.add_argument("--out", required=True)
    s.add_argument("--preset", choices=("planted", "homologue"), default="planted")
    s.add_argument("--subjects", type=int, default=6)
    s.add_argument("--segments", type=int, default=200)
    s.add_argument("--noise", type=float, default=0.1)
    s.add_argument("--seed", type=int, default=42)
    s.set_defaults(func=_cmd_synth)

    c = sub.add_parser("clean", help="delete stage artifacts")
    c.add_argument("--out")
    c.add_argument("--config")
    c.add_argument("--stage", help="first stage to delete (default: all)")
    c.set_defaults(func=_cmd_clean)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command in ("emit-plots", "clean") and not (args.out or args.config):
        print("error: --out or --config required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigInvalid as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (InputMissing, ArtifactMissing, InputError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except StageFailed as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
