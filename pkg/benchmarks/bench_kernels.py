"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from coopshift import _kernels
from coopshift.dipole import Transition


def _cases(rng):
    tr = Transition()
    chain = np.cumsum(np.full(8, 5.0)) + rng.normal(0, 0.02, size=(20000, 8))
    fluxes = rng.poisson(660, size=(3, 200000)).astype(float)
    return {
        "collective_sums (20000 draws x 8 ions)":
            lambda k: k.collective_sums(chain, tr.wavenumber, tr.pair_amplitude),
        "three_point_centers (200000 samples)":
            lambda k: k.three_point_centers(fluxes[0], fluxes[1], fluxes[2], 0.0, 24.63, 1e-6),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = _kernels.available_backends()
    if "compiled" not in backends:
        print("compiled kernels not built; run `python3 setup.py build_ext --inplace` first")
    cases = _cases(np.random.default_rng(0))
    print(f"{'kernel':42s}" + "".join(f"{b:>14s}" for b in backends) + ("   speedup" if len(backends) > 1 else ""))
    for name, fn in cases.items():
        times = []
        for b in backends:
            k = _kernels.get_backend(b)
            fn(k)  # warm-up
            times.append(min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)))
        row = f"{name:42s}" + "".join(f"{t * 1e3:12.2f}ms" for t in times)
        if len(times) > 1:
            row += f"   {times[0] / times[1]:6.1f}x"
        print(row)


if __name__ == "__main__":
    main()
