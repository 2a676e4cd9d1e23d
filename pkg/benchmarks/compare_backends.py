"""Timing comparison of the jitted kernels against the numpy fallback.

Runs the hot paths (derivative-polynomial Horner evaluation and the
Crank-Nicolson march) in the current process, then re-executes itself in a
subprocess with SCHROFLAT_DISABLE_NUMBA=1 and merges the results.  Usage:

    python3 benchmarks/compare_backends.py
"""
import json
import os
import subprocess
import sys
import time

import numpy as np


def _time(fn, repeats=5):
    fn()  # warm up (triggers compilation on the jitted path)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_benchmarks():
    from schroflat import HAS_NUMBA, SimConfig, simulate
    from schroflat.kernel import KernelDerivPoly
    from schroflat.cli import builtin_scenarios, sine_profile, synthesize_control

    results = {"backend": "numba" if HAS_NUMBA else "numpy"}

    poly = KernelDerivPoly.build(0.35, 31)
    # 480 = one 32-panel quadrature generation; 200k = bulk evaluation
    small = np.linspace(-2.0, 2.0, 480)
    results["horner_deg31_480_pts"] = _time(lambda: [poly(small) for _ in range(200)])
    big = np.linspace(-2.0, 2.0, 200_000)
    results["horner_deg31_200k_pts"] = _time(lambda: poly(big))

    cfg = SimConfig(Nx=400, Nt=20_000, T=0.5, snapshot_count=3)
    mode = sine_profile()
    results["cn_march_400x20000"] = _time(lambda: simulate(mode, None, cfg), repeats=3)

    sc = builtin_scenarios()["reference"]
    results["reference_synthesis"] = _time(lambda: synthesize_control(sc), repeats=3)

    return results


def main():
    if os.environ.get("_BENCH_CHILD"):
        print(json.dumps(run_benchmarks()))
        return

    mine = run_benchmarks()
    env = dict(os.environ, SCHROFLAT_DISABLE_NUMBA="1", _BENCH_CHILD="1")
    out = subprocess.run([sys.executable, os.path.abspath(__file__)],
                         env=env, capture_output=True, text=True, check=True)
    other = json.loads(out.stdout.strip().splitlines()[-1])

    a, b = (mine, other) if mine["backend"] == "numba" else (other, mine)
    names = [k for k in a if k != "backend"]
    width = max(len(n) for n in names)
    print(f"{'benchmark':<{width}}  {'numba':>10}  {'numpy':>10}  speedup")
    for name in names:
        ratio = b[name] / a[name]
        print(f"{name:<{width}}  {a[name]:>9.4f}s  {b[name]:>9.4f}s  {ratio:6.2f}x")


if __name__ == "__main__":
    main()
