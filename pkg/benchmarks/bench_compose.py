"""Compare the compiled and numpy composition kernels.

    python3 benchmarks/bench_compose.py --p 2 --sizes 64,128,256,512

Both kernels are imported directly, so the backend chosen at import time
(and RAMLAB_PURE_PYTHON) does not matter here.  Outputs are checked for
equality before timing.
"""

import argparse
import json
import timeit

import numpy as np

from ramlab import _kernels_py
from ramlab.nottingham import FieldSpec, random_series, random_wild

try:
    from ramlab import _ckernels
except ImportError:
    _ckernels = None


def time_kernel(fn, f, g, p, mod, repeat):
    timer = timeit.Timer(lambda: fn(f, g, p, mod))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--m", type=int, default=1)
    ap.add_argument("--sizes", default="32,64,128,256,512")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)

    field = FieldSpec.default(args.p, args.m)
    mod = field.modulus_array
    rng = np.random.default_rng(args.seed)
    rows = []
    for N in (int(x) for x in args.sizes.split(",")):
        f = random_wild(field, N, rng).coeffs
        g = random_series(field, N, rng).coeffs
        row = {"N": N, "numpy_s": time_kernel(_kernels_py.compose, f, g, args.p, mod, args.repeat)}
        if _ckernels is not None:
            assert np.array_equal(_ckernels.compose(f, g, args.p, mod), _kernels_py.compose(f, g, args.p, mod))
            row["cython_s"] = time_kernel(_ckernels.compose, f, g, args.p, mod, args.repeat)
            row["speedup"] = row["numpy_s"] / row["cython_s"]
        rows.append(row)

    if args.json:
        print(json.dumps({"p": args.p, "m": args.m, "rows": rows}, indent=2))
        return
    print(f"compose over F_{field.order}, best of {args.repeat}")
    print(f"{'N':>6} {'numpy (ms)':>12} {'cython (ms)':>12} {'speedup':>8}")
    for r in rows:
        c = f"{r['cython_s'] * 1e3:12.3f} {r['speedup']:8.1f}" if "cython_s" in r else f"{'n/a':>12} {'':>8}"
        print(f"{r['N']:>6} {r['numpy_s'] * 1e3:12.3f} {c}")


if __name__ == "__main__":
    main()
