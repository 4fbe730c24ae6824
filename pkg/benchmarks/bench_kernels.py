"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--n 12]

Prints the best-of-``repeat`` wall time per kernel and backend, and the
speedup of the compiled core.
"""
import argparse
import timeit

import numpy as np

from gammadiag import _kernels
from gammadiag.diagonalizer import DiagonalizeConfig, diagonalize, ranked_rows
from gammadiag.models import build_random, build_tfim
from gammadiag.oracle import eigen_hermitian


def cases(n):
    rnd = build_random(16, 20000, seed=1)
    r = int(ranked_rows(rnd)[0])
    dq, dh = rnd.diagonal()
    rq, rh = rnd.row(r)
    keys, vals = rnd.keys.copy(), rnd.coefficients.copy()
    vec = np.random.default_rng(0).standard_normal((64, 4096))
    dense = np.random.default_rng(1).standard_normal((1024, 1024)) + 0j
    herm = dense[:256, :256] + dense[:256, :256].T
    lo, hi = np.arange(0, 256, 2), np.arange(1, 256, 2)
    return {
        "rotate": lambda: _kernels.rotate(keys, vals, r, 12345, 0.6, 0.8),
        "xy": lambda: _kernels.xy(keys, vals, r, 12345),
        "row_sq_norms": lambda: _kernels.row_sq_norms(keys, vals),
        "bucket_best_s": lambda: _kernels.bucket_best_s(dq, dh, rq, rh, r, True),
        "fwht": lambda: _kernels.fwht(vec.copy()),
        "xor_gather": lambda: _kernels.xor_gather(dense),
        "xor_gather_inplace": lambda: _kernels.xor_gather_inplace(dense.copy()),
        "jacobi_round 256": lambda: _kernels.jacobi_round(herm.copy(), lo, hi),
        "eigen_hermitian 64": lambda: eigen_hermitian(herm[:64, :64]),
        f"diagonalize tfim n={n}": lambda: diagonalize(
            build_tfim(n), DiagonalizeConfig(stop_epsilon=2**-7, delete_chi=2**-11)
        ),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=12)
    args = ap.parse_args()
    backends = _kernels.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; timing the numpy fallback only")
    table = {}
    for name in backends:
        with _kernels.use_backend(name):
            for label, fn in cases(args.n).items():
                number = 1 if label.startswith(("diagonalize", "eigen")) else 10
                t = min(timeit.repeat(fn, number=number, repeat=args.repeat)) / number
                table.setdefault(label, {})[name] = t
    print(f"{'kernel':28s}" + "".join(f"{b:>14s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for label, row in table.items():
        line = f"{label:28s}" + "".join(f"{row[b] * 1e3:12.3f}ms" for b in backends)
        if len(backends) > 1:
            line += f"{row['python'] / row['cython']:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
