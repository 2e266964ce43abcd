#!/usr/bin/env python3
"""Benchmark the integrator kernels on both lanes: numba-jitted (default)
versus the pure-numpy fallback selected by RYDSIM_NO_NUMBA=1.

Each lane runs in a fresh interpreter so the import-time jit decision is
exercised exactly the way users hit it.  Workloads mirror the hot loops:
a Lindblad evolution batch, an rf-driven pair-state field scan, and a
mesoscopic adiabatic sweep.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys

_WORKLOAD = r"""
import json
import time

import numpy as np

from rydsim import kernels

results = {"numba": kernels.NUMBA_ENABLED}
rng = np.random.default_rng(0)

# warm up (pays the jit cost on the numba lane before timing)
gen = -2j * np.pi * (lambda a: 0.5 * (a + a.conj().T))(
    rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
)
y0 = np.zeros(16, dtype=complex); y0[0] = 1.0
kernels.rk45_linear(gen, y0, 0.1, 1e-8, 1e-10, 10_000_000)
kernels.rk45_rf_pair(np.array([0.3]), 10.0, 30.0, 15.0, 0.1, 1e-8, 1e-10, 10_000_000)
kernels.rk45_sweep_unitary(1.0, 0.0, -10.0, 1.0, 0.1, np.eye(2, dtype=complex),
                           1e-8, 1e-10, 10_000_000)

def bench(fn, n):
    t0 = time.perf_counter()
    for _ in range(n):
        fn()
    return (time.perf_counter() - t0) / n

results["lindblad_16dim_2us"] = bench(
    lambda: kernels.rk45_linear(gen, y0, 2.0, 1e-8, 1e-10, 10_000_000), 20
)

couplings = np.array([0.283])
def rf_scan():
    for ddc in np.linspace(-40.0, 40.0, 40):
        kernels.rk45_rf_pair(couplings, ddc, 30.0, 15.0, 1.5, 1e-8, 1e-10, 10_000_000)
results["rf_pair_scan_40pts"] = bench(rf_scan, 3)

def sweep():
    kernels.rk45_sweep_unitary(
        3.16, 0.0, -16.0, 0.35, 2 * 16.0 / 0.35, np.eye(2, dtype=complex),
        1e-10, 1e-12, 200_000_000,
    )
results["mesoscopic_core_sweep"] = bench(sweep, 3)

print(json.dumps(results))
"""


def run_lane(disable_numba, repeat):
    env = dict(os.environ)
    env.pop("RYDSIM_NO_NUMBA", None)
    if disable_numba:
        env["RYDSIM_NO_NUMBA"] = "1"
    best = {}
    for _ in range(repeat):
        out = subprocess.run(
            [sys.executable, "-c", _WORKLOAD], env=env, capture_output=True, text=True,
            check=True,
        )
        data = json.loads(out.stdout.strip().splitlines()[-1])
        for key, val in data.items():
            if key == "numba":
                best[key] = val
            else:
                best[key] = min(best.get(key, float("inf")), val)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=1)
    args = parser.parse_args()

    print("running numba lane ...")
    fast = run_lane(False, args.repeat)
    print("running pure-numpy lane (RYDSIM_NO_NUMBA=1) ...")
    slow = run_lane(True, args.repeat)
    assert fast["numba"] and not slow["numba"], "lane selection failed"

    width = max(len(k) for k in fast if k != "numba")
    print(f"\n{'workload':<{width}}  {'numba':>12}  {'numpy':>12}  {'speedup':>8}")
    for key in fast:
        if key == "numba":
            continue
        a, b = fast[key], slow[key]
        print(f"{key:<{width}}  {a * 1e3:>10.2f}ms  {b * 1e3:>10.2f}ms  {b / a:>7.1f}x")


if __name__ == "__main__":
    main()
