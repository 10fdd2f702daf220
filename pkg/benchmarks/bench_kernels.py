"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both implementations are imported directly, so one process compares them.
The numba functions are called once before timing to exclude JIT/cache load.
Also reports an end-to-end pipeline run under each backend (via a
subprocess with ``SPECFP_DISABLE_NUMBA`` set), which is what users feel.
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import tempfile
import textwrap
import timeit

import numpy as np

from specfp._kernels import _numba, _numpy


def _cases(gen):
    x = gen.random((2000, 30)) + 0.01
    c = gen.random((6, 30)) + 0.01
    d = _numpy.pairwise_distances(x[:800], x[:800], _numpy.EUCLIDEAN)
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    labels = gen.integers(0, 5, 800).astype(np.int64)
    dr = d[:300, :300].copy()
    return {
        "pairwise cosine 2000x2000": lambda m: m.pairwise_distances(x, x, _numpy.COSINE),
        "assign_nearest 2000x6": lambda m: m.assign_nearest(x, c, _numpy.SQEUCLIDEAN),
        "silhouette n=800": lambda m: m.silhouette_samples(d, labels, 5),
        "agglomerate average R=300": lambda m: m.agglomerate(dr, _numpy.AVERAGE),
    }


_PIPELINE = textwrap.dedent("""
    import sys, time
    from pathlib import Path
    from specfp import KERNEL_BACKEND, io
    from specfp.cli import demo_config, write_dataset
    from specfp.config import load_config
    from specfp.pipeline import run_pipeline
    from specfp.synth import example_specs, planted_modes_dataset
    root = Path(sys.argv[1])
    write_dataset(planted_modes_dataset(example_specs(), 6, 200, seed=42), root / "data")
    io.write_json(root / "config.json", demo_config())
    cfg = load_config(root / "config.json")
    t = time.perf_counter()
    run_pipeline(cfg)
    print(KERNEL_BACKEND, time.perf_counter() - t)
""")


def _pipeline(disable: bool) -> str:
    env = dict(os.environ, SPECFP_DISABLE_NUMBA="1" if disable else "0")
    with tempfile.TemporaryDirectory() as tmp:
        out = subprocess.run([sys.executable, "-c", _PIPELINE, tmp], env=env,
                             capture_output=True, text=True, check=True)
    backend, secs = out.stdout.split()
    return f"{backend:>6}: {float(secs):7.2f} s"


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-pipeline", action="store_true")
    args = ap.parse_args(argv)

    gen = np.random.default_rng(0)
    print(f"{'kernel':<28}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, fn in _cases(gen).items():
        fn(_numba)  # compile or load from cache
        t_np = min(timeit.repeat(lambda: fn(_numpy), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: fn(_numba), number=1, repeat=args.repeat))
        print(f"{name:<28}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>9.1f}x")

    if not args.skip_pipeline:
        print("\nfull pipeline, planted dataset (6 subjects x 200 segments):")
        print(_pipeline(disable=True))
        print(_pipeline(disable=False))


if __name__ == "__main__":
    main()
