"""Run the pipeline on the four worked states in data/ and print a summary.

    python3 scripts/run_examples.py [--max-order N]
"""

import argparse
import time
from pathlib import Path

from jacsdp import PipelineConfig, run_pipeline
from jacsdp.cli_io import parse_state_file
from jacsdp.quantum import entanglement_from_lambda

DATA = Path(__file__).resolve().parents[1] / "data"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-order", type=int, default=None)
    args = ap.parse_args()
    print(f"{'state':6} {'route':8} {'lambda':>14} {'E_G':>12} {'bound':>14} cert  orders  secs")
    for path in sorted(DATA.glob("ex4*.txt")):
        a = parse_state_file(path).tensor()
        t0 = time.perf_counter()
        rep = run_pipeline(a, PipelineConfig(max_order=args.max_order))
        r = rep.result
        _, e_g = entanglement_from_lambda(r.lam)
        orders = ",".join(f"{o.order}{o.method[0]}" for o in rep.orders)
        print(f"{path.stem:6} {rep.route:8} {r.lam:14.10f} {e_g:12.8f} {r.upper_bound:14.10f} "
              f"{str(r.certified):5} {orders:7} {time.perf_counter() - t0:5.1f}")
        for k, z in enumerate(r.vectors.vectors, 1):
            print(f"        z^({k}) = " + ", ".join(f"{c.real:+.4f}{c.imag:+.4f}i" for c in z))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
