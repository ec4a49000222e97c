"""Time the compiled and pure-Python kernel backends on representative inputs.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--format csv|json]
"""
import argparse
import json
import math
import sys
import timeit

import numpy as np

from hardyz import _dd, _pykernels

try:
    from hardyz import _ckernels
except ImportError:
    _ckernels = None


def _cases(rng):
    t = np.sort(rng.uniform(1e3, 1e5, 2000))
    nterms = np.floor(np.sqrt(t / (2 * math.pi))).astype(np.int64)
    logn, _ = _dd.log_table(int(nterms.max()))
    rsqrt = np.zeros(logn.shape[0])
    rsqrt[1:] = 1 / np.sqrt(np.arange(1, logn.shape[0]))
    theta = rng.uniform(0, 2 * math.pi, t.shape[0])
    rs_out = np.empty_like(t)

    f = rng.standard_normal(2_000_001)

    u = np.log(np.linspace(1.0, 1000.0, 40_001))
    F = rng.standard_normal(u.shape[0])
    center = np.ascontiguousarray(u[1::2])
    filon_args = tuple(np.ascontiguousarray(a) for a in
                       (u[0:-2:2] - center, u[2::2] - center, center, F[0:-2:2], F[1::2], F[2::2]))
    omegas = np.linspace(-50, 50, 64)
    filon_out = np.empty(omegas.shape[0], dtype=np.complex128)

    prev = np.ones(200_001, dtype=np.int64)
    prev[0] = 0
    conv_out = np.empty_like(prev)

    blob = rng.bytes(8_000_000)

    return {
        "rs_main_sum (2000 t, N <= 126)": lambda m: m.rs_main_sum(t, theta, nterms, logn, rsqrt, rs_out),
        "simpson_cumsum (2e6 panels)": lambda m: m.simpson_cumsum(f, 0.05, 0.0, 0.0),
        "kahan_sum (2e6 values)": lambda m: m.kahan_sum(f, 0.0, 0.0),
        "filon_sweep (2e4 panels x 64 freq)": lambda m: m.filon_sweep(*filon_args, omegas, filon_out),
        "dirichlet_one_convolve (n <= 2e5)": lambda m: m.dirichlet_one_convolve(prev, conv_out),
        "crc64 (8 MB)": lambda m: m.crc64(blob, 0),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--format", choices=["csv", "json"], default="csv")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(7)
    rows = []
    for name, call in _cases(rng).items():
        best = {}
        for label, mod in (("python", _pykernels), ("cython", _ckernels)):
            if mod is None:
                best[label] = math.nan
                continue
            best[label] = min(timeit.repeat(lambda: call(mod), number=1, repeat=args.repeat))
        rows.append({"kernel": name, "python_s": best["python"], "cython_s": best["cython"],
                     "speedup": best["python"] / best["cython"]})

    if args.format == "json":
        json.dump(rows, sys.stdout, indent=2)
        print()
    else:
        print("kernel,python_s,cython_s,speedup")
        for r in rows:
            print(f"{r['kernel']},{r['python_s']:.4g},{r['cython_s']:.4g},{r['speedup']:.3g}")
    if _ckernels is None:
        print("compiled backend not built; run `pip install -e . --no-build-isolation`", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
