"""Compare the compiled kernels with the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--N 100]

Times the secular-function scan (the exact quantizer's hot loop), scalar
secular and log-derivative calls (root polishing), and a batched
surface Green's function sweep, and checks that both backends agree.
"""

import argparse
import time

import numpy as np

from nhphase import _kernels_py as py
from nhphase.greens import build_principal_layer, nonbloch_radius
from nhphase.lattice import ModelParams

try:
    from nhphase import _ckernels as cy
except ImportError:
    cy = None


def best(fn, repeat):
    t = []
    for _ in range(repeat):
        s = time.perf_counter()
        fn()
        t.append(time.perf_counter() - s)
    return min(t)


def cases(N):
    p = ModelParams(1.0, 3.5, 2.5, 1.3, 0.0, N)
    h = p.hoppings
    lam = np.linspace(-40.0, 40.0, 80 * N + 1)
    lam = lam[np.abs(lam) > 1e-6]
    zs = [complex(x, 0.3) for x in np.linspace(0.5, 30.0, 200)]
    q = ModelParams(1.0, 1.2, 1.6, 0.3, 0.0, N)
    layer = build_principal_layer(q, nonbloch_radius(q))
    w = np.full(161, 1e-3j)
    return {
        "secular scan": (lambda k: k.secular_real(*h, N, lam)),
        "secular scalar x200": (lambda k: [k.secular_real(*h, N, float(x.real)) for x in zs]),
        "log-derivative x200": (lambda k: [k.log_secular(*h, N, x) for x in zs]),
        "sancho-rubio x161": (lambda k: k.sancho_rubio(layer.H00, layer.H01, layer.H10, w)),
    }


def agree(a, b):
    if isinstance(a, tuple):
        return max(agree(x, y) for x, y in zip(a, b))
    if isinstance(a, list):
        return max(agree(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    scale = max(np.max(np.abs(a)), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--N", type=int, default=100)
    args = ap.parse_args()
    if cy is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'kernel':<22}{'python [s]':>12}{'cython [s]':>12}{'speedup':>9}{'rel diff':>11}")
    for name, fn in cases(args.N).items():
        tp = best(lambda: fn(py), args.repeat)
        if cy is None:
            print(f"{name:<22}{tp:>12.4g}")
            continue
        tc = best(lambda: fn(cy), args.repeat)
        d = agree(fn(py), fn(cy))
        print(f"{name:<22}{tp:>12.4g}{tc:>12.4g}{tp / tc:>8.1f}x{d:>11.2g}")


if __name__ == "__main__":
    main()
