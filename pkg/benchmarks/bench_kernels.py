"""Benchmark the per-edge assembly kernels: numba vs pure numpy.

Run with:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from pipeflow.kernels import _numpy
from pipeflow.mesh import gauss_rule

try:
    from pipeflow.kernels import _numba
except ImportError:
    _numba = None

G, W = gauss_rule(3)


def workload(cells, seed=0):
    rng = np.random.default_rng(seed)
    return dict(
        rho_n=rng.uniform(0.7, 1.4, cells),
        rho_o=rng.uniform(0.7, 1.4, cells),
        m_n=rng.uniform(-0.5, 0.5, cells + 1),
        m_o=rng.uniform(-0.5, 0.5, cells + 1),
        pp=rng.uniform(0.8, 1.2, cells),
        pp2=rng.uniform(0.7, 1.3, cells),
    )


def time_residual(mod, w, reps):
    cells = w["rho_n"].size
    res_rho = np.empty(cells)
    res_m = np.empty(cells + 1)
    args = (w["rho_n"], w["rho_o"], w["m_n"], w["m_o"], w["pp"],
            1.0 / cells, 1.0, 1.0, 1e-3, 0.25, False, G, W, res_rho, res_m)
    mod.edge_residual(*args)  # warm-up / JIT
    t0 = time.perf_counter()
    for _ in range(reps):
        mod.edge_residual(*args)
    return (time.perf_counter() - t0) / reps


def time_jacobian(mod, w, reps):
    cells = w["rho_n"].size
    data = np.empty((cells, 6))
    args = (w["rho_n"], w["m_n"], w["pp2"], 1.0 / cells, 1.0, 1.0,
            1e-3, 0.25, False, 0.0, G, W, data)
    mod.edge_jacobian(*args)
    t0 = time.perf_counter()
    for _ in range(reps):
        mod.edge_jacobian(*args)
    return (time.perf_counter() - t0) / reps


def main():
    backends = [("numpy", _numpy)]
    if _numba is not None:
        backends.append(("numba", _numba))
    else:
        print("numba unavailable; benchmarking numpy only")

    print(f"{'kernel':<10} {'cells':>6} " +
          " ".join(f"{name + ' [us]':>12}" for name, _ in backends) +
          ("   speedup" if len(backends) == 2 else ""))
    for cells in (64, 512, 4096):
        w = workload(cells)
        reps = max(20, 200000 // cells)
        for label, timer in (("residual", time_residual), ("jacobian", time_jacobian)):
            times = [timer(mod, w, reps) for _, mod in backends]
            row = f"{label:<10} {cells:>6} " + " ".join(
                f"{t * 1e6:>12.2f}" for t in times
            )
            if len(times) == 2:
                row += f"   {times[0] / times[1]:>6.1f}x"
            print(row)


if __name__ == "__main__":
    main()
