"""Compare the compiled and numpy spline kernels (deposit and gather).

    python3 benchmarks/bench_kernels.py --np 4096 204800 --repeat 5
"""

import argparse
import timeit

import numpy as np

from gyroua import _spline_py
from gyroua.fields import FieldGrid

try:
    from gyroua import _spline_ext
except ImportError:
    _spline_ext = None


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--np", type=int, nargs="+", default=[4096, 65536], dest="sizes")
    ap.add_argument("--grid", type=int, nargs=2, default=[32, 16])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    grid = FieldGrid(*args.grid)
    rng = np.random.default_rng(0)
    backends = {"python": _spline_py}
    if _spline_ext is not None:
        backends["cython"] = _spline_ext
    else:
        print("compiled extension not built; timing the numpy fallback only")
    fields = np.ascontiguousarray(rng.normal(size=(2, grid.nx1, grid.nx2)))

    print(f"{'particles':>10} {'kernel':>8} " + " ".join(f"{b + ' [ms]':>14}" for b in backends) + f" {'speed-up':>9}")
    for n in args.sizes:
        x1 = rng.uniform(0, grid.lengths[0], n)
        x2 = rng.uniform(0, grid.lengths[1], n)
        w = rng.uniform(0.5, 1.5, n)
        calls = {
            "deposit": lambda m: m.deposit(x1, x2, w, grid.nx1, grid.nx2, grid.dx1, grid.dx2),
            "gather": lambda m: m.gather(x1, x2, fields, grid.dx1, grid.dx2),
        }
        for name, call in calls.items():
            outs = {b: call(m) for b, m in backends.items()}
            if len(outs) == 2:
                gap = np.max(np.abs(outs["python"] - outs["cython"]))
                assert gap <= 1e-12 * max(1.0, np.max(np.abs(outs["python"]))), f"{name}: backends disagree by {gap}"
            ms = {b: 1e3 * min(timeit.repeat(lambda m=m: call(m), number=1, repeat=args.repeat)) for b, m in backends.items()}
            ratio = ms["python"] / ms["cython"] if "cython" in ms else float("nan")
            print(f"{n:>10} {name:>8} " + " ".join(f"{ms[b]:>14.3f}" for b in backends) + f" {ratio:>8.1f}x")


if __name__ == "__main__":
    main()
