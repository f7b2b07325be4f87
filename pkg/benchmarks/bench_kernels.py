"""Time the compiled and pure-Python kernel backends on the same inputs.

Usage: ``python3 benchmarks/bench_kernels.py [--slots N] [--radius R] [--repeat K]``.
Each timing is the best of ``--repeat`` runs. Outputs are also compared for
bit equality, since the Monte Carlo results must not depend on the backend.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from attocell import _kernels
from attocell.lattice import LatticeSpec, ReceiverPos
from attocell.mcsim import interferer_coefficients, stream_key
from attocell.params import SystemParams, derive


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--slots", type=int, default=20_000, help="Monte Carlo slots per draw call")
    ap.add_argument("--radius", type=int, default=50, help="interferer index radius")
    ap.add_argument("--lattice-n", type=int, default=1000, help="lattice sum truncation N")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    params = SystemParams()
    spec = LatticeSpec.from_ratio(3.0, 5)
    dp = derive(params, spec.h)
    coef = interferer_coefficients(ReceiverPos(), spec, params, dp, args.radius)
    key = stream_key(0)
    backends = _kernels.backends()
    print(f"default backend: {_kernels.BACKEND}; threads: {_kernels.thread_count()}")
    print(f"available: {', '.join(backends)}")

    cases = {
        f"interference_draws ({coef.size} interferers x {args.slots} slots)":
            lambda impl: _kernels.interference_draws(coef, key, 0, args.slots, params.M, impl=impl),
        f"lattice_row_sums (N={args.lattice_n}, s={dp.beta / 2:g})":
            lambda impl: _kernels.lattice_row_sums(0.0, 0.0, spec.spacing, spec.h, dp.beta / 2,
                                                   args.lattice_n, impl=impl),
    }
    for label, call in cases.items():
        print(f"\n{label}")
        timings, outputs = {}, {}
        for name, impl in backends.items():
            timings[name], outputs[name] = best_of(lambda: call(impl), args.repeat)
            print(f"  {name:9s} {timings[name] * 1e3:10.2f} ms")
        if len(backends) == 2:
            a, b = outputs["compiled"], outputs["python"]
            a, b = (a, b) if isinstance(a, tuple) else ((a,), (b,))
            same = all(np.array_equal(x, y) for x, y in zip(a, b))
            print(f"  speedup   {timings['python'] / timings['compiled']:10.1f}x; bit-identical: {same}")


if __name__ == "__main__":
    main()
