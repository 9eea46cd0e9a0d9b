"""Wall-clock profile of one three-qubit-site distance solve.

    python3 scripts/time_three_sites.py [--seed 1] [--verbose]
"""
from __future__ import annotations

import argparse
import logging
import time

from qw1 import sdp
from qw1.channels import CompositeSystem, random_channel
from qw1.gauge import HermitianDifference, SolverOptions, build_program, w1_distance


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--verbose", action="store_true")
    args = ap.parse_args()
    if args.verbose:
        logging.basicConfig(level=logging.INFO)

    system = CompositeSystem(in_dims=(2, 2, 2), out_dims=(2, 2, 2))
    a, b = random_channel(system, 2, args.seed), random_channel(system, 2, args.seed + 1)

    t0 = time.perf_counter()
    prog = build_program(HermitianDifference.between(a, b))
    t1 = time.perf_counter()
    reduced, ok = sdp.presolve(prog.conic)
    t2 = time.perf_counter()
    print(f"build   {t1 - t0:6.1f} s  constraints x variables {prog.conic.A.shape}")
    print(f"presolve {t2 - t1:5.1f} s  rank {reduced.rank}, dropped {len(reduced.removed_rows)}, consistent {ok}")
    t3 = time.perf_counter()
    res = w1_distance(a, b, SolverOptions(verbose=args.verbose))
    elapsed = time.perf_counter() - t3
    print(f"solve   {elapsed:6.1f} s  {res.iterations} iterations ({elapsed / max(res.iterations, 1):.2f} s each)")
    print(f"value {res.value:.10f}  dual {res.lower_bound:.10f}  status {res.status}")


if __name__ == "__main__":
    main()
