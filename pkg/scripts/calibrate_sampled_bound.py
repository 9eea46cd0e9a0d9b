"""Looseness of the sampled upper bound against the solver on random n=1 qubit channel pairs.

    python3 scripts/calibrate_sampled_bound.py [--instances 10] [--samples 10000]

Writes docs/sampled_bound_calibration.json and prints one line per instance.
"""
from __future__ import annotations

import argparse
import json
import pathlib
import time

import numpy as np

from qw1.channels import CompositeSystem, random_channel
from qw1.gauge import HermitianDifference, w1_norm
from qw1.oracles import sampled_upper_bound


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--instances", type=int, default=10)
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    system = CompositeSystem(in_dims=(2,), out_dims=(2,))
    rows = []
    for i in range(args.instances):
        rng = np.random.default_rng([args.seed, i])
        a, b = random_channel(system, 2, rng), random_channel(system, 2, rng)
        x = HermitianDifference.between(a, b)
        exact = w1_norm(x).value
        t0 = time.perf_counter()
        bound = sampled_upper_bound(x, args.samples, seed=i)
        rows.append({"instance": i, "solver": exact, "sampled": bound, "ratio": bound / exact,
                     "seconds": round(time.perf_counter() - t0, 2)})
        print(f"{i:3d}  solver {exact:.6f}  sampled {bound:.6f}  ratio {bound / exact:.4f}", flush=True)
    ratios = np.array([r["ratio"] for r in rows])
    summary = {"samples": args.samples, "seed": args.seed, "max_ratio": float(ratios.max()),
               "mean_ratio": float(ratios.mean()), "rows": rows}
    out = pathlib.Path(__file__).resolve().parents[1] / "docs" / "sampled_bound_calibration.json"
    out.write_text(json.dumps(summary, indent=1) + "\n")
    print(f"max ratio {ratios.max():.4f}, mean {ratios.mean():.4f}")


if __name__ == "__main__":
    main()
