"""Compare the numpy and numba bump kernels on identical inputs.

    python3 benchmarks/bench_kernels.py --sizes 1000 100000 --repeat 5

Prints one line per (kernel, size, backend) with the best wall time and the
largest absolute difference from the numpy result.
"""
import argparse
import timeit

import numpy as np

from anonlab.glue import kernels
from anonlab.glue.bump import _coeffs, derivative_form


def _cases(size: int, order: int):
    coeffs, m = _coeffs(order), derivative_form(order)[1]
    xs = np.linspace(-0.05, 1.05, size)
    edges = np.linspace(0.0, 1.0, size + 1)
    yield "shape", (xs, coeffs, m), 0
    yield "gk15", (edges[:-1], edges[1:], coeffs, m), 1


def run(sizes, order: int, repeat: int) -> list[dict]:
    rows = []
    for size in sizes:
        for name, args, slot in _cases(size, order):
            reference = None
            for backend, funcs in kernels.IMPLEMENTATIONS.items():
                fn = funcs[slot]
                fn(*args)  # warm-up, includes jit compilation
                best = min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))
                out = fn(*args)
                out = np.concatenate(out) if isinstance(out, tuple) else out
                if reference is None:
                    reference = out
                rows.append({"kernel": name, "size": size, "backend": backend, "seconds": best,
                             "max_abs_diff": float(np.max(np.abs(out - reference)))})
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1_000, 100_000, 1_000_000])
    ap.add_argument("--order", type=int, default=3, help="derivative order of the bump")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"active backend: {kernels.ACTIVE}")
    print(f"{'kernel':<7}{'size':>10}  {'backend':<7}{'best s':>12}{'max diff':>12}")
    for r in run(args.sizes, args.order, args.repeat):
        print(f"{r['kernel']:<7}{r['size']:>10}  {r['backend']:<7}{r['seconds']:>12.6f}{r['max_abs_diff']:>12.2e}")


if __name__ == "__main__":
    main()
