"""Seeded property suites behind ``qw1 verify``.

Each suite returns a list of ``PropertyResult``; a result carries the worst
observed deviation, the tolerance it was held to, and on failure enough of
the instance (seed, index, channel documents) to rerun it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .channels import (
    Channel,
    CompositeSystem,
    check_partition,
    random_channel,
    random_density_matrix,
    reduce_to_subset,
    set_partitions,
    tensor_ordered,
)
from .gauge import (
    OPTIMAL,
    HermitianDifference,
    SolverOptions,
    reduction_lower_bound,
    state_w1,
    telescope_bound,
    w1_distance,
    w1_norm,
)
from .io import channel_to_document, encode_matrix
from .oracles import certificate_check, trace_distance_oracle

SUITES = ("metric", "additivity", "stability", "superadditivity", "bounds", "duality")


@dataclass
class PropertyResult:
    suite: str
    name: str
    passed: bool
    observed: float
    tolerance: float
    seed: int
    instances: int
    failures: list[dict] = field(default_factory=list)


class _Tracker:
    def __init__(self, suite: str, name: str, tol: float, seed: int):
        self.suite, self.name, self.tol, self.seed = suite, name, tol, seed
        self.worst = -np.inf
        self.count = 0
        self.failures: list[dict] = []

    def record(self, deviation: float, index: int, **dump):
        """``deviation`` is how far the property is from failing the wrong way (<= tol passes)."""
        self.count += 1
        self.worst = max(self.worst, float(deviation))
        if not deviation <= self.tol:
            self.failures.append({"index": index, "deviation": float(deviation), **dump})

    def result(self) -> PropertyResult:
        return PropertyResult(self.suite, self.name, not self.failures, self.worst, self.tol,
                              self.seed, self.count, self.failures)


def _doc(ch: Channel) -> dict:
    return channel_to_document(ch, "delta")


def qubits(n: int) -> CompositeSystem:
    return CompositeSystem(in_dims=(2,) * n, out_dims=(2,) * n)


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _random_rank(rng: np.random.Generator, system: CompositeSystem) -> int:
    lo = -(-system.r // system.q)
    return int(rng.integers(max(1, lo), max(1, lo) + 3))


def random_pair(system: CompositeSystem, rng: np.random.Generator) -> tuple[Channel, Channel]:
    a = random_channel(system, _random_rank(rng, system), rng)
    b = random_channel(system, _random_rank(rng, system), rng)
    return a, b


def neighbouring_pair(system: CompositeSystem, site: int, rng: np.random.Generator) -> tuple[Channel, Channel]:
    """``a`` random; ``b`` keeps ``a``'s reduction at ``site`` and gets a fresh channel there."""
    a = random_channel(system, _random_rank(rng, system), rng)
    others = [s for s in system.sites if s != site]
    local = system.subsystem([site])
    fresh = random_channel(local, _random_rank(rng, local), rng)
    b = tensor_ordered(reduce_to_subset(a, others), fresh) if others else fresh
    return a, b


def metric(seed: int = 0, count: int = 10, opts: SolverOptions | None = None) -> list[PropertyResult]:
    opts = opts or SolverOptions()
    trace = _Tracker("metric", "state specialization vs trace distance", 1e-6, seed)
    sym = _Tracker("metric", "symmetry", 1e-6, seed)
    tri = _Tracker("metric", "triangle inequality", 1e-6, seed)
    ident = _Tracker("metric", "W1(E,E) = 0", 1e-7, seed)
    sep = _Tracker("metric", "W1 >= 1e-4 when ||delta_D - delta_E||_F >= 1e-3", 0.0, seed)
    for i in range(count):
        rng = _rng(seed, i)
        d = (2, 3)[i % 2]
        rho, sigma = random_density_matrix(d, rng), random_density_matrix(d, rng)
        dev = abs(state_w1(rho, sigma, (d,), opts).value - trace_distance_oracle(rho, sigma))
        trace.record(dev, i, rho=encode_matrix(rho), sigma=encode_matrix(sigma))

        s = qubits(2)
        a, b = random_pair(s, rng)
        c = random_channel(s, _random_rank(rng, s), rng)
        ab, ba = w1_distance(a, b, opts).value, w1_distance(b, a, opts).value
        bc, ac = w1_distance(b, c, opts).value, w1_distance(a, c, opts).value
        dump = dict(a=_doc(a), b=_doc(b), c=_doc(c))
        sym.record(abs(ab - ba), i, **dump)
        tri.record(ac - ab - bc, i, **dump)
        ident.record(abs(w1_distance(a, a, opts).value), i, a=_doc(a))
        if np.linalg.norm(a.delta - b.delta) >= 1e-3:
            sep.record(1e-4 - ab, i, **dump)
    return [trace.result(), sym.result(), tri.result(), ident.result(), sep.result()]


def _parts_for(partition: Sequence[Sequence[int]] | None) -> list[list[int]]:
    if partition is None:
        return [[0], [1]]
    n = sum(len(p) for p in partition)
    return check_partition(partition, range(n))


def additivity(seed: int = 0, count: int = 5, partition=None, opts: SolverOptions | None = None) -> list[PropertyResult]:
    """W1(D1 (x) D2, E1 (x) E2) = W1(D1, E1) + W1(D2, E2) for a two-block partition of qubit sites."""
    opts = opts or SolverOptions()
    parts = _parts_for(partition)
    if len(parts) != 2:
        raise ValueError("additivity takes a partition into exactly two blocks")
    n = sum(len(p) for p in parts)
    tr = _Tracker("additivity", f"additivity over {_fmt(parts)}", 1e-5, seed)
    full = qubits(n)
    for i in range(count):
        rng = _rng(seed, i)
        s1, s2 = full.subsystem(parts[0]), full.subsystem(parts[1])
        d1, e1 = random_pair(s1, rng)
        d2, e2 = random_pair(s2, rng)
        lhs = w1_distance(tensor_ordered(d1, d2), tensor_ordered(e1, e2), opts).value
        rhs = w1_distance(d1, e1, opts).value + w1_distance(d2, e2, opts).value
        tr.record(abs(lhs - rhs), i, d1=_doc(d1), e1=_doc(e1), d2=_doc(d2), e2=_doc(e2))
    return [tr.result()]


def stability(seed: int = 0, count: int = 5, opts: SolverOptions | None = None) -> list[PropertyResult]:
    """W1(D (x) F, E (x) F) = W1(D, E) with D, E on site 1 and F on site 2."""
    opts = opts or SolverOptions()
    tr = _Tracker("stability", "stability under a shared factor", 1e-5, seed)
    full = qubits(2)
    for i in range(count):
        rng = _rng(seed, i)
        d, e = random_pair(full.subsystem([0]), rng)
        f = random_channel(full.subsystem([1]), int(rng.integers(1, 4)), rng)
        lhs = w1_distance(tensor_ordered(d, f), tensor_ordered(e, f), opts).value
        tr.record(abs(lhs - w1_distance(d, e, opts).value), i, d=_doc(d), e=_doc(e), f=_doc(f))
    return [tr.result()]


def superadditivity(seed: int = 0, count: int = 5, n: int = 2, opts: SolverOptions | None = None) -> list[PropertyResult]:
    """Sum of reduced distances over any partition never exceeds the distance."""
    opts = opts or SolverOptions()
    tr = _Tracker("superadditivity", f"reduction lower bound, all partitions of n={n}", 1e-7, seed)
    s = qubits(n)
    for i in range(count):
        rng = _rng(seed, i)
        a, b = random_pair(s, rng)
        value = w1_distance(a, b, opts).value
        for parts in set_partitions(list(s.sites)):
            lb = reduction_lower_bound(a, b, parts, opts)
            tr.record(lb - value, i, partition=_fmt(parts), a=_doc(a), b=_doc(b))
    return [tr.result()]


def bounds(seed: int = 0, count: int = 5, opts: SolverOptions | None = None) -> list[PropertyResult]:
    opts = opts or SolverOptions()
    nb = _Tracker("bounds", "neighbouring difference norm <= 1", 1e-7, seed)
    up = _Tracker("bounds", "W1 <= n", 1e-7, seed)
    tel = _Tracker("bounds", "W1 <= telescope bound", 1e-7, seed)
    for i in range(count):
        rng = _rng(seed, i)
        n = 1 + i % 2
        s = qubits(n)
        site = int(rng.integers(n))
        a, b = neighbouring_pair(s, site, rng)
        nb.record(w1_norm(HermitianDifference.between(a, b), opts).value - 1.0, i, a=_doc(a), b=_doc(b))
        a, b = random_pair(s, rng)
        value = w1_distance(a, b, opts).value
        up.record(value - n, i, a=_doc(a), b=_doc(b))
        tel.record(value - telescope_bound(a, b, opts).bound, i, a=_doc(a), b=_doc(b))
    return [nb.result(), up.result(), tel.result()]


def duality(seed: int = 0, count: int = 5, opts: SolverOptions | None = None) -> list[PropertyResult]:
    opts = opts or SolverOptions()
    cert = _Tracker("duality", "certificate residuals", 1e-7, seed)
    gap = _Tracker("duality", "relative duality gap", 1e-7, seed)
    for i in range(count):
        rng = _rng(seed, i)
        s = qubits(1 + i % 2)
        a, b = random_pair(s, rng)
        x = HermitianDifference.between(a, b)
        res = w1_norm(x, opts)
        dump = dict(a=_doc(a), b=_doc(b), status=res.status)
        if res.status != OPTIMAL:
            cert.record(np.inf, i, **dump)
            continue
        rep = certificate_check(res, x)
        cert.record(rep.max_residual if rep.ok else np.inf, i, flags=rep.flags, **dump)
        gap.record(res.relative_gap, i, **dump)
    return [cert.result(), gap.result()]


def _fmt(parts) -> str:
    return ";".join(",".join(str(s + 1) for s in p) for p in parts)


def run_suite(name: str, seed: int = 0, opts: SolverOptions | None = None, partition=None) -> list[PropertyResult]:
    runners: dict[str, Callable[[], list[PropertyResult]]] = {
        "metric": lambda: metric(seed, opts=opts),
        "additivity": lambda: additivity(seed, partition=partition, opts=opts),
        "stability": lambda: stability(seed, opts=opts),
        "superadditivity": lambda: superadditivity(
            seed, n=2 if partition is None else sum(len(p) for p in partition), opts=opts),
        "bounds": lambda: bounds(seed, opts=opts),
        "duality": lambda: duality(seed, opts=opts),
    }
    if name not in runners:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return runners[name]()

