"""Compiled versus NumPy kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times the interface recursion over a frequency grid and the continuum RK4
loop on both backends and checks that they agree.
"""

import argparse
import timeit

import numpy as np

from opencavity import _kernels
from opencavity.geometry import CavityGeometry
from opencavity.modes import wavenumber


def cases():
    geom = CavityGeometry.build(1.25, 10, 0.5)
    k = wavenumber(np.linspace(0.5, 1.5, 100_001))
    n, w = geom.indices, geom.widths
    yield "recursion (21 regions x 1e5 omega)", lambda b: b.recursion(k, n, w)
    yield "outgoing  (21 regions x 1e5 omega)", lambda b: b.outgoing(k, n, w)

    M = 20_001
    rng = np.random.default_rng(0)
    eta = (rng.normal(size=M) + 1j * rng.normal(size=M)) * 1e-2
    weights = np.full(M, 1.0 / M)
    det = np.linspace(-1.0, 1.0, M)
    b0 = np.zeros(M, complex)
    yield "rk4_continuum (M=2e4, 500 steps)", lambda b: b.rk4_continuum(1.0, b0, eta, weights, det, 0.01, 500, 50)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels.compiled is None:
        print("compiled extension not built; only the NumPy fallback is available")
    backends = [("numpy", _kernels.fallback)]
    if _kernels.compiled is not None:
        backends.append(("cython", _kernels.compiled))
    print(f"{'kernel':40s} " + " ".join(f"{name:>12s}" for name, _ in backends) + "     speedup")
    for label, fn in cases():
        times, outs = [], []
        for _, be in backends:
            outs.append(fn(be))
            times.append(min(timeit.repeat(lambda: fn(be), number=1, repeat=args.repeat)))
        line = f"{label:40s} " + " ".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(backends) == 2:
            a, b = outs
            a = a if isinstance(a, tuple) else (a,)
            b = b if isinstance(b, tuple) else (b,)
            diff = max(float(np.max(np.abs(np.asarray(x) - np.asarray(y)))) for x, y in zip(a, b))
            line += f"  {times[0] / times[1]:8.2f}x  (max diff {diff:.1e})"
        print(line)


if __name__ == "__main__":
    main()
