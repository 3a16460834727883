"""Benchmark the oscillator integration kernels: compiled vs pure NumPy.

Usage: python benchmarks/bench_cpg.py [--steps N] [--batch B]

Times the two workloads that dominate real runs: a single gait-network
rollout with recording (what the simulator does) and a batched
multi-initialisation run (what convergence studies and sweeps do).
"""

import argparse
import time

import numpy as np

from oncilla import _kernel_py
from oncilla import cpg

try:
    from oncilla import _kernel as _kernel_c
except ImportError:
    _kernel_c = None


def build_args(n_nodes, batch):
    params = cpg.make_trot_network(3.5, joints_per_leg=n_nodes // 4)
    rng = np.random.default_rng(0)
    theta = rng.uniform(0, 2 * np.pi, (batch, params.n))
    r = rng.normal(size=(batch, params.n))
    return params, theta, r


def time_call(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=5000)
    ap.add_argument("--batch", type=int, default=100)
    args = ap.parse_args()

    backends = [("numpy", _kernel_py)]
    if _kernel_c is not None:
        backends.insert(0, ("cython", _kernel_c))
    else:
        print("compiled kernel not built; benchmarking the fallback only")

    params, theta, r = build_args(12, args.batch)
    common = (params.omega, params.gamma, params.coupling, params.phase_bias,
              params.shape_table, np.zeros(params.n))

    print(f"network: {params.n} nodes, batch {args.batch},"
          f" {args.steps} RK4 steps")
    print(f"{'backend':8} {'record 1 rollout':>18} {'batched run':>14}"
          f" {'steps/s (batched)':>18}")
    results = {}
    for name, impl in backends:
        t_rec = time_call(impl.rk4_record, theta[0], r[0], *common, 1e-3,
                          args.steps)
        t_run = time_call(impl.rk4_run, theta, r, *common, 1e-3, args.steps)
        rate = args.batch * args.steps / t_run
        results[name] = (t_rec, t_run)
        print(f"{name:8} {t_rec * 1e3:15.1f} ms {t_run * 1e3:11.1f} ms"
              f" {rate:18.3g}")

    if len(results) == 2:
        speedup = results["numpy"][1] / results["cython"][1]
        print(f"\ncompiled kernel speedup on the batched run: {speedup:.1f}x")
        out_c = _kernel_c.rk4_run(theta, r, *common, 1e-3, 200)
        out_p = _kernel_py.rk4_run(theta, r, *common, 1e-3, 200)
        err = max(np.max(np.abs(out_c[0] - out_p[0])),
                  np.max(np.abs(out_c[1] - out_p[1])))
        print(f"max |cython - numpy| after 200 steps: {err:.3g}")


if __name__ == "__main__":
    main()
