"""Time the compiled kernels against their plain-array twins.

Each kernel is warmed up first so JIT compilation never lands in a
measurement, then timed over repeated calls on a workload shaped like
the bundled demo scenarios (8-state coupled error block, thirty
thousand grid steps). Run from the repository root:

    python3 benchmarks/bench_kernels.py --repeat 5
    python3 benchmarks/bench_kernels.py --json results.json
"""

import argparse
import json
import time

import numpy as np

from leadersync import SwitchingSignal, SystemModel, Topology, build_H, \
    gen_schedule, simulate
from leadersync.numerics import expm, kernels, kron


def _demo_workload():
    A = np.array([[-0.38, 0.72], [-0.68, 0.42]])
    B = np.array([[0.26], [0.31]])
    K = np.array([[0.887356, 1.21952]])
    H = build_H(Topology(4, frozenset(
        [(0, 1), (0, 2), (3, 2), (1, 3), (4, 3), (2, 4)]))).H
    d = 8
    top = np.hstack([kron(np.eye(4), A), -kron(H, B @ K)])
    M = np.vstack([top, np.zeros((d, 2 * d))])
    Eg = expm(M, 0.001)
    Fs = Eg[:d, :d][None, :, :].copy()
    Gs = Eg[:d, d:][None, :, :].copy()
    sched = gen_schedule(0.001, 0.018, 0.001, 30.0, 7)
    ticks = np.rint(sched.instants / 0.001).astype(np.int64)
    steps = np.diff(ticks)
    modes = np.zeros(steps.shape[0], dtype=np.int64)
    x0 = np.array([1.2, -0.8, -2.6, 3.4, 0.6, -1.7, -1.4, 2.1])
    return {
        "propagate_grid": (kernels.propagate_grid,
                           kernels.propagate_grid_py,
                           (Fs, Gs, modes, steps, x0)),
        "propagate_linear": (kernels.propagate_linear,
                             kernels.propagate_linear_py,
                             (np.ascontiguousarray(Eg[:d, :d]), x0,
                              int(ticks[-1]))),
        "expm_pade7": (kernels.expm_pade7, kernels.expm_pade7_py,
                       (M * 0.001,)),
        "eig_qr": (kernels.eig_qr, kernels.eig_qr_py,
                   (np.random.default_rng(0).normal(size=(12, 12)),)),
        "jacobi_eigvals": (kernels.jacobi_eigvals,
                           kernels.jacobi_eigvals_py,
                           (_random_sym(16),)),
        "jacobi_singular_values": (kernels.jacobi_singular_values,
                                   kernels.jacobi_singular_values_py,
                                   (np.random.default_rng(1)
                                    .normal(size=(16, 10)),)),
    }


def _random_sym(n):
    S = np.random.default_rng(2).normal(size=(n, n))
    return 0.5 * (S + S.T)


def _time(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(repeat):
    rows = []
    for name, (jit_fn, py_fn, args) in _demo_workload().items():
        jit_fn(*args)
        py_fn(*args)
        t_jit = _time(jit_fn, args, repeat)
        t_py = _time(py_fn, args, repeat)
        rows.append({"kernel": name, "jit_s": t_jit, "pure_s": t_py,
                     "speedup": t_py / t_jit if t_jit > 0 else float("inf")})
    return rows


def bench_simulate(repeat):
    A = np.array([[-0.38, 0.72], [-0.68, 0.42]])
    B = np.array([[0.26], [0.31]])
    model = SystemModel(A, B)
    top = Topology(4, frozenset([(0, 1), (0, 2), (3, 2), (1, 3), (4, 3),
                                 (2, 4)]))
    K = np.array([[0.887356, 1.21952]])
    sched = gen_schedule(0.001, 0.018, 0.001, 30.0, 7)
    x0l = np.array([1.2, -0.8])
    x0f = np.array([[2.4, -1.6], [-1.4, 2.6], [1.8, -2.5], [-0.2, 1.3]])
    sig = SwitchingSignal.static()

    def run(pure):
        simulate(model, [top], sig, K, sched, x0l, x0f, pure=pure)

    run(False)
    run(True)
    t_jit = _time(lambda: run(False), (), repeat)
    t_py = _time(lambda: run(True), (), repeat)
    return {"kernel": "simulate (demo, 30 s horizon)", "jit_s": t_jit,
            "pure_s": t_py,
            "speedup": t_py / t_jit if t_jit > 0 else float("inf")}


def main():
    ap = argparse.ArgumentParser(
        description="compare the compiled and plain-array kernel backends")
    ap.add_argument("--repeat", type=int, default=5,
                    help="timed repetitions per kernel; best time wins")
    ap.add_argument("--json", default=None,
                    help="also write the rows to this JSON file")
    args = ap.parse_args()

    if not kernels.NUMBA_ENABLED:
        print("note: compiled backend disabled (LEADERSYNC_NUMBA=0); "
              "both columns run the plain-array path")
    kernels.warmup()

    rows = bench_kernels(args.repeat)
    rows.append(bench_simulate(args.repeat))

    width = max(len(r["kernel"]) for r in rows)
    print(f"{'kernel':<{width}}  {'jit [s]':>12}  {'pure [s]':>12}  "
          f"{'speedup':>8}")
    for r in rows:
        print(f"{r['kernel']:<{width}}  {r['jit_s']:>12.6f}  "
              f"{r['pure_s']:>12.6f}  {r['speedup']:>8.2f}")

    if args.json:
        with open(args.json, "w") as f:
            json.dump({"numba_enabled": kernels.NUMBA_ENABLED,
                       "repeat": args.repeat, "rows": rows}, f, indent=2)
        print(f"wrote {args.json}")


if __name__ == "__main__":
    main()
