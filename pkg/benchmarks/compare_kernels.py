"""Compare the compiled and pure-python integration kernels.

Runs the same Boeing scenario through both and reports wall time and
the worst relative state disagreement.

    python benchmarks/compare_kernels.py [--t-final 20]
"""

import argparse
import time

import numpy as np

from mracsim import backend
from mracsim.harness import boeing_scenario, run_scenario


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--t-final", type=float, default=20.0)
    ap.add_argument("--case", choices=["i", "ii"], default="i")
    args = ap.parse_args()

    cfg = boeing_scenario(args.case).replace(t_final=args.t_final)
    print(f"scenario {cfg.name}, t_final={args.t_final}s, dt={cfg.dt}")
    print(f"available backend: {backend.BACKEND}")

    t0 = time.time()
    rec_py = run_scenario(cfg, use_python_kernel=True)
    t_py = time.time() - t0
    print(f"python kernel:   {t_py:8.2f} s")

    if backend.BACKEND != "compiled":
        print("compiled kernel not built; nothing to compare")
        return

    t0 = time.time()
    rec_c = run_scenario(cfg)
    t_c = time.time() - t0
    print(f"compiled kernel: {t_c:8.2f} s   speedup {t_py / t_c:.1f}x")

    scale = 1.0 + np.max(np.abs(rec_py.states), axis=0)
    dev = np.max(np.abs(rec_c.states - rec_py.states) / scale)
    print(f"worst relative state disagreement: {dev:.3e}")


if __name__ == "__main__":
    main()
