"""Bounds on seeded random unit 2x2x2 tensors.

For each tensor prints the oracle value, the polished eigenvalue, the
relaxation bound and whether the eigenpair was certified.

    python3 scripts/random_sandwich.py [count] [base_seed]
"""

import sys
import time

import numpy as np

from jacsdp import ComplexTensor, PipelineConfig, run_pipeline
from jacsdp.tensor_core import random_tensor


def main(count: int = 20, base_seed: int = 1000) -> int:
    bad = 0
    print(f"{'seed':>6} {'oracle':>16} {'lambda':>16} {'sqrt(rho)':>16} {'gap':>10} cert  order  secs")
    for i in range(count):
        seed = base_seed + i
        a = ComplexTensor.auto(random_tensor((2, 2, 2), np.random.default_rng(seed)))
        t0 = time.perf_counter()
        rep = run_pipeline(a, PipelineConfig(seed=seed))
        r = rep.result
        ok = r.lower_bound <= r.lam + 1e-12 and r.lam <= r.upper_bound + 1e-7
        bad += not ok
        print(f"{seed:>6} {r.lower_bound:16.12f} {r.lam:16.12f} {r.upper_bound:16.12f} "
              f"{r.bound_gap:10.2e} {str(r.certified):5} {r.order_used:>5} {time.perf_counter() - t0:5.1f}"
              + ("" if ok else "  SANDWICH VIOLATED"))
    return 1 if bad else 0


if __name__ == "__main__":
    args = [int(x) for x in sys.argv[1:3]]
    sys.exit(main(*args))
