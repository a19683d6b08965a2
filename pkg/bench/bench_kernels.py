"""Time the compiled and pure-Python kernels on the same inputs.

    python bench/bench_kernels.py [--repeats N]

Prints one line per (kernel, case, backend) with the best wall time and
the speedup of the compiled backend over the Python one, and checks that
both backends return the same values.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from aci.kernels import backends
from aci.probdist import builtin


def _inputs(pmf):
    p = pmf.cell_probs()
    cx, cy = pmf.support()
    nx, ny = pmf.shape
    return p, cx, cy, nx, ny


def _best(fn, repeats):
    best, out = float("inf"), None
    for _ in range(repeats):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)
    impls = backends()
    if "cython" not in impls:
        print("compiled backend not built; only the Python kernels are available")
    lam = (0.3, 0.3, 0.4)
    cases = []
    for name, pmf, restarts, iters in (
        ("zsource 3 cells", builtin("zsource", [1 / 3]), 32, 2000),
        ("connected 16 cells", builtin("connected", [0.05]), 32, 500),
    ):
        args_ = _inputs(pmf)
        q = pmf.default_q_size()
        C0 = np.random.default_rng(0).dirichlet(np.ones(q), size=(restarts, len(args_[0])))
        cases.append(("descend_batch", f"{name}, {restarts}x{iters}",
                      lambda m, a=args_, c=C0, it=iters: m.descend_batch(*a, c, lam, it, 0.0)))
    zs = _inputs(builtin("zsource", [1 / 3]))
    W = np.array([(1 / 3, 1 / 3, 1 / 3), (0.2, 0.2, 0.6), (0.6, 0.2, 0.2)])
    cases.append(("grid_search", "zsource q=4 g=8", lambda m: m.grid_search(*zs, 4, 8, W)))

    print(f"{'kernel':<14} {'case':<28} {'backend':<8} {'seconds':>9} {'speedup':>8}")
    for kernel, case, fn in cases:
        times, outs = {}, {}
        for name, mod in impls.items():
            times[name], outs[name] = _best(lambda: fn(mod), args.repeats)
        for name in impls:
            sp = times["python"] / times[name]
            print(f"{kernel:<14} {case:<28} {name:<8} {times[name]:9.4f} {sp:7.1f}x")
        if "cython" in outs:
            a, b = outs["python"][0], outs["cython"][0]
            if kernel == "descend_batch":
                a, b = outs["python"][1], outs["cython"][1]
            diff = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
            print(f"{'':<14} {'':<28} max |python - cython| = {diff:.2e}")


if __name__ == "__main__":
    main()
