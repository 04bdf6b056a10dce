"""Compare the numba and pure-numpy raster kernels on rendered frames.

    python benchmarks/bench_backends.py [--repeat 50] [--out results.csv]

Times largest-component labelling and boundary tracing separately, checks
the two backends return identical results, and prints a CSV with the
median time per frame and the speed-up.
"""
import argparse
import csv
import statistics
import sys
import time

import numpy as np

from signwave import kernels
from signwave.signature import binarize
from signwave.signs import CANONICAL_SIGNS
from signwave.synth import ViewSpec, render_sign


def frames():
    views = [ViewSpec(azimuth=a, altitude_m=h) for a in (0.0, 45.0) for h in (2.0, 5.0)]
    return [binarize(render_sign(s, v)) for s in CANONICAL_SIGNS for v in views]


def median_ms(fn, masks, repeat):
    samples = []
    for _ in range(repeat):
        for m in masks:
            t0 = time.perf_counter()
            fn(m)
            samples.append(time.perf_counter() - t0)
    return statistics.median(samples) * 1e3


def run(repeat=50):
    if kernels.largest_component_numba is None:
        raise SystemExit("numba is not installed; nothing to compare")
    masks = frames()
    seeds = {id(m): kernels.largest_component_numpy(m) for m in masks}

    def trace_with(tracer):
        def go(m):
            area, _, _, y, x = seeds[id(m)]
            return tracer(m, y, x, area)
        return go

    # warm the JIT and check parity before timing
    for m in masks:
        assert kernels.largest_component_numba(m) == seeds[id(m)]
        np.testing.assert_array_equal(trace_with(kernels.trace_boundary_numba)(m),
                                      trace_with(kernels.trace_boundary_numpy)(m))

    rows = []
    for name, numba_fn, numpy_fn in [
        ("largest_component", kernels.largest_component_numba, kernels.largest_component_numpy),
        ("trace_boundary", trace_with(kernels.trace_boundary_numba),
         trace_with(kernels.trace_boundary_numpy)),
    ]:
        fast = median_ms(numba_fn, masks, repeat)
        slow = median_ms(numpy_fn, masks, repeat)
        rows.append([name, len(masks) * repeat, f"{fast:.4f}", f"{slow:.4f}", f"{slow / fast:.1f}"])
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    rows = run(args.repeat)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["kernel", "calls", "numba_ms", "numpy_ms", "speedup"])
    writer.writerows(rows)
    if args.out:
        out.close()


if __name__ == "__main__":
    main()
