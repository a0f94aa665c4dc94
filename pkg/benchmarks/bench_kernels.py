"""Time the compiled certification kernels against the numpy fallback.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat 5] [--dims 2 3 4]``.
Prints one TSV row per (kernel, n) with the best-of-repeat wall time of each
backend and the speedup.
"""

import argparse
import timeit

import numpy as np

from qposmaps import _fallback
from qposmaps.generators import random_q_positive
from qposmaps.qorder import default_grid
from qposmaps.superop import choi


def _cases(n, rng):
    _, phi = random_q_positive(n, rng, "invertible")
    _, psi = random_q_positive(n, rng, "schur")
    grid = default_grid()
    C = np.ascontiguousarray(choi(phi).matrix)
    return {
        "choi_min_eig": lambda k: k.choi_min_eig(C, n, n),
        "resolvent_min_eigs": lambda k: k.resolvent_min_eigs(phi.matrix, n, grid, 1),
        "dominance_min_eigs": lambda k: k.dominance_min_eigs(phi.matrix, psi.matrix, n, grid, 2),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4])
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    try:
        from qposmaps import _kernels
    except ImportError:
        raise SystemExit("compiled kernels are not built; run pip install -e . --no-build-isolation")

    rng = np.random.default_rng(args.seed)
    print("kernel\tn\tcompiled_s\tpython_s\tspeedup")
    for n in args.dims:
        for name, fn in _cases(n, rng).items():
            number = 200 if name == "choi_min_eig" else 3
            tc = min(timeit.repeat(lambda: fn(_kernels), number=number, repeat=args.repeat)) / number
            tp = min(timeit.repeat(lambda: fn(_fallback), number=number, repeat=args.repeat)) / number
            print(f"{name}\t{n}\t{tc:.3e}\t{tp:.3e}\t{tp / tc:.2f}")


if __name__ == "__main__":
    main()
