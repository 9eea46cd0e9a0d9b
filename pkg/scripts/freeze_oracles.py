"""Compute reference values with the oracle paths only and write them to tests/fixtures.

Nothing here calls the gauge program builder or ``w1_norm``. Run from the
repository root:

    python3 scripts/freeze_oracles.py
"""
from __future__ import annotations

import json
import pathlib

import numpy as np

from qw1.channels import (
    CompositeSystem,
    identity_channel,
    replacement_channel,
    state_system,
)
from qw1.gauge import HermitianDifference, W1Result
from qw1.io import encode_matrix
from qw1.oracles import (
    certificate_check,
    diagonal_difference,
    diagonal_gauge_upper_bound,
    sampled_upper_bound,
    trace_distance_oracle,
)

OUT = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "oracle_values.json"


def jordan_bracket(x: HermitianDifference) -> tuple[float, float]:
    """n = 1 bracket without a solver.

    Upper: x = x_+ - x_- is feasible once Tr_A x_+ and Tr_A x_- are multiples
    of 1_B (checked with ``certificate_check``). Lower: any feasible
    ``Y - Z = x`` has Tr Y >= Tr x_+ = ||x||_1 / 2 and Tr Y = t r.
    """
    s = x.system
    w, v = np.linalg.eigh(x.x)
    pos = (v * np.clip(w, 0, None)) @ v.conj().T
    neg = (v * np.clip(-w, 0, None)) @ v.conj().T
    lower = float(np.abs(w).sum()) / (2 * s.r)
    t = float(np.trace(pos).real) / s.r
    rep = certificate_check(W1Result(t, 0.0, [(s.sites[0], pos, neg, t)], 0.0, 0.0, 0.0, "optimal", 0), x)
    upper = t if rep.ok else np.inf
    return lower, upper


def main() -> None:
    entries = []

    qubit = CompositeSystem(in_dims=(2,), out_dims=(2,))
    x = HermitianDifference.between(identity_channel(qubit), replacement_channel(qubit, np.eye(2) / 2))
    lo, hi = jordan_bracket(x)
    entries.append({
        "name": "identity_vs_depolarizing_qubit",
        "value": hi,
        "lower": lo,
        "upper": hi,
        "sampled_upper": sampled_upper_bound(x, 2000, seed=0),
        "provenance": "Jordan-decomposition certificate (upper) and trace bound ||x||_1/(2r) (lower); "
                      "the diagonal LP does not apply because x is not diagonal",
    })

    for name, p, q in (("orthogonal_pure_qubit", [1, 0], [0, 1]),
                       ("diag_three_quarters", [0.75, 0.25], [0.25, 0.75]),
                       ("diag_seven_tenths", [0.7, 0.3], [0.2, 0.8])):
        rho, sigma = np.diag(p).astype(complex), np.diag(q).astype(complex)
        xs = HermitianDifference(state_system((2,)), rho - sigma)
        entries.append({
            "name": name,
            "rho": encode_matrix(rho),
            "sigma": encode_matrix(sigma),
            "value": trace_distance_oracle(rho, sigma),
            "diagonal_lp": diagonal_gauge_upper_bound(xs),
            "provenance": "half trace norm of rho - sigma; diagonal LP on the same difference",
        })

    rng = np.random.default_rng(20261015)
    two = CompositeSystem(in_dims=(2, 2), out_dims=(2, 2))
    for i in range(5):
        xd = diagonal_difference(two, rng)
        entries.append({
            "name": f"diagonal_n2_{i}",
            "x": encode_matrix(xd.x),
            "diagonal_lp": diagonal_gauge_upper_bound(xd),
            "sampled_upper": sampled_upper_bound(xd, 500, seed=i),
            "provenance": "diagonal LP (own builder) and sampled decompositions; both upper bounds",
        })

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({"entries": entries}, indent=1) + "\n")
    for e in entries:
        print(e["name"], {k: e[k] for k in e if k in ("value", "lower", "upper", "diagonal_lp", "sampled_upper")})


if __name__ == "__main__":
    main()
