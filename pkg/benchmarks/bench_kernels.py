"""Compare the numba and pure-numpy backends on the integration kernel.

Each backend runs in its own interpreter because the backend is fixed at
import time by ``PHANTOMEYM_DISABLE_NUMBA``.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--rho-max 20]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from phantomeym import BACKEND, InitialData, IntegrationControls, integrate, initial_state

repeat, rho_max = int(sys.argv[1]), float(sys.argv[2])
data = [InitialData(2.0, 1.0, 0.0), InitialData(1.5, 0.0, 0.0), InitialData(0.75, 0.3, 2.0)]
ctl = IntegrationControls(rho_max=rho_max, escape_latch=False)

t0 = time.perf_counter()
integrate(initial_state(data[0]), ctl)  # warm-up (includes jit compile)
warm = time.perf_counter() - t0

times, steps, ends = [], 0, []
for _ in range(repeat):
    t0 = time.perf_counter()
    for d in data:
        tr = integrate(initial_state(d), ctl)
        steps += len(tr.rho) - 1
        ends.append(tr.states[-1].tolist())
    times.append(time.perf_counter() - t0)
print(json.dumps({"backend": BACKEND, "warmup": warm, "best": min(times),
                  "steps_per_run": steps // repeat, "final": ends[-len(data):]}))
"""


def run(disable, repeat, rho_max):
    env = dict(os.environ)
    env["PHANTOMEYM_DISABLE_NUMBA"] = "1" if disable else "0"
    out = subprocess.run(
        [sys.executable, "-c", WORKER, str(repeat), str(rho_max)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--rho-max", type=float, default=20.0)
    args = ap.parse_args()

    fast = run(False, args.repeat, args.rho_max)
    slow = run(True, args.repeat, args.rho_max)
    diff = max(abs(a - b) for fa, fb in zip(fast["final"], slow["final"]) for a, b in zip(fa, fb))

    for r in (fast, slow):
        print(f"{r['backend']:>6}: warm-up {r['warmup']:8.3f} s   best of {args.repeat} {r['best']:8.4f} s"
              f"   ({r['steps_per_run']} steps)")
    print(f"speedup {slow['best'] / fast['best']:.1f}x, max end-state difference {diff:.2e}")


if __name__ == "__main__":
    main()
