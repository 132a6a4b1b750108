"""Compare the numba kernels with the pure-numpy fallback.

Each backend runs in its own interpreter because the choice is fixed at
import time by ``NHWISHART_DISABLE_JIT``. Usage::

    python3 benchmarks/bench_accel.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from nhwishart import backend, specfun
from nhwishart.ensemble import EnsembleConfig, sample_spectrum
from nhwishart.finite_n import mean_density_radial

repeat = int(sys.argv[1])

def best(fn):
    fn()  # warm-up (includes JIT compilation)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)

x = np.geomspace(1e-3, 500.0, 2000)
cases = {
    "spectrum n=100 (4 trials)": lambda: sample_spectrum(EnsembleConfig(n=100, m=101, trials=4, seed=1)),
    "spectrum n=10 (200 trials)": lambda: sample_spectrum(EnsembleConfig(n=10, m=105, trials=200, seed=1)),
    "log K_nu, 2000 points, nu=0..80": lambda: [specfun.log_bessel_k_array(nu, x) for nu in (0, 5, 20, 80)],
    "exact density n=100, 2000 points": lambda: mean_density_radial(100, 1, x),
}
print(json.dumps({"backend": backend(), "seconds": {k: best(f) for k, f in cases.items()}}))
"""


def run(disable_jit: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("NHWISHART_DISABLE_JIT", None)
    if disable_jit:
        env["NHWISHART_DISABLE_JIT"] = "1"
    out = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, check=True,
                         capture_output=True, text=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    fast = run(False, args.repeat)
    slow = run(True, args.repeat)
    print(f"{'case':36s} {fast['backend']:>10s} {slow['backend']:>10s} {'speedup':>8s}")
    for case, t_fast in fast["seconds"].items():
        t_slow = slow["seconds"][case]
        print(f"{case:36s} {t_fast:10.4f} {t_slow:10.4f} {t_slow / t_fast:8.1f}x")


if __name__ == "__main__":
    main()
