"""Compiled versus numpy kernels: wall time on the two hot loops.

    python benchmarks/bench_kernels.py --d 9,17 --repeat 3
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from dilutedmp import _backend
from dilutedmp.decoder import compile_sequence, decode
from dilutedmp.geometry import Family, SparsificationPattern, build_surface_code
from dilutedmp.mp import MpConfig
from dilutedmp.noise import NoiseKind, NoiseModel, prior_of, sample, trial_rng
from dilutedmp.oracle import error_correcting_radius
from dilutedmp.pauli import Syndrome


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_decode(d, trials, repeat, backend):
    code = build_surface_code(d)
    comp = compile_sequence(d, Family.DV)
    model = NoiseModel(NoiseKind.DEPOLARIZING, 0.08)
    prior = prior_of(model)
    cfg = MpConfig(eps=0.15)
    syns = []
    for t in range(trials):
        e = sample(model, code.n, trial_rng(7, d, t))
        syns.append(Syndrome((code.hz @ e.x) & 1, (code.hx @ e.z) & 1))

    def run():
        for syn in syns:
            decode(code, comp, syn, prior, cfg, backend=backend)

    return _best(run, repeat)


def bench_radius(d, weight, repeat, backend):
    code = build_surface_code(d)
    pat = SparsificationPattern(Family.CH, 1)
    return _best(lambda: error_correcting_radius(code, pat, max_weight=weight, backend=backend), repeat)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", default="9,17", help="distances for the decode benchmark")
    ap.add_argument("--trials", type=int, default=50, help="decodes per timing")
    ap.add_argument("--radius-d", type=int, default=7, help="distance for the radius scan")
    ap.add_argument("--radius-weight", type=int, default=3, help="largest weight scanned")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if _backend.compiled is None:
        raise SystemExit("compiled kernels are not built; nothing to compare")
    py, cy = _backend.get("python"), _backend.get("cython")

    print(f"{'task':<28}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for d in (int(v) for v in args.d.split(",")):
        tp = bench_decode(d, args.trials, args.repeat, py)
        tc = bench_decode(d, args.trials, args.repeat, cy)
        print(f"{f'decode d={d} x{args.trials}':<28}{tp:>12.3f}{tc:>12.3f}{tp / tc:>9.1f}x")
    tp = bench_radius(args.radius_d, args.radius_weight, args.repeat, py)
    tc = bench_radius(args.radius_d, args.radius_weight, args.repeat, cy)
    label = f"radius d={args.radius_d} w<={args.radius_weight}"
    print(f"{label:<28}{tp:>12.3f}{tc:>12.3f}{tp / tc:>9.1f}x")
    return 0


if __name__ == "__main__":
    np.seterr(all="ignore")
    raise SystemExit(main())
