"""Slower, independent paths that pin or bracket W1 values.

None of these go through ``gauge.build_program``. The diagonal bound has
its own linear-program builder (solved on nonnegative blocks), the sampled
bound never calls a solver, and the certificate check recomputes every
constraint from the channel-model primitives.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import sdp
from .channels import Channel, CompositeSystem, reduce_hat_matrix, reduce_to_subset, tensor_ordered
from .gauge import HermitianDifference, W1Result, active_sites
from .tensor import check_density_matrix, partial_trace

CERT_TOL = 1e-7
VALUE_TOL = 1e-8


def trace_distance_oracle(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the sum of the absolute eigenvalues of ``rho - sigma``."""
    rho, sigma = np.asarray(rho), np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"shape mismatch: {rho.shape} vs {sigma.shape}")
    check_density_matrix(rho, 1e-9)
    check_density_matrix(sigma, 1e-9)
    d = rho - sigma
    return 0.5 * float(np.abs(np.linalg.eigvalsh((d + d.conj().T) / 2)).sum())


# --- diagonal restriction -------------------------------------------------------


def _is_diagonal(m: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(m - np.diag(np.diag(m))), initial=0.0) <= tol)


def diagonal_gauge_upper_bound(x: HermitianDifference, tol: float = 1e-9) -> float:
    """Gauge program with every Y_j, Z_j restricted to be diagonal.

    On diagonals the three constraint families become linear equations in
    the entries ``y[b, a]`` indexed by output and input configurations, so
    the restriction is an LP. Restricting the feasible set can only raise
    the minimum, hence an upper bound on ``w1_norm(x)``.
    """
    s = x.system
    if not _is_diagonal(x.x):
        raise ValueError("diagonal bound needs a diagonal difference")
    if not all(_is_diagonal(nu) for nu in s.ref_states):
        raise ValueError("diagonal bound needs diagonal reference states")
    dx = np.diag(x.x).real
    if not np.any(dx):
        return 0.0
    sites = active_sites(s)
    n, k = s.n, len(sites)
    shape = tuple(s.out_dims) + tuple(s.in_dims)
    side = s.side

    # configuration index -> per-factor digits
    digits = np.array(list(np.ndindex(*shape)), dtype=int).reshape(side, 2 * n)
    b_index = np.ravel_multi_index(digits[:, :n].T, s.out_dims) if n else np.zeros(side, int)

    def hat_rows(pos: int) -> sp.csr_matrix:
        # sum over (b_pos, a_pos) weighted by nu_pos[b_pos]; rows indexed by the other digits
        nu = np.diag(s.ref_states[pos]).real
        keep = [i for i in range(2 * n) if i not in (pos, n + pos)]
        kept_shape = tuple(shape[i] for i in keep)
        rows = np.ravel_multi_index(digits[:, keep].T, kept_shape) if keep else np.zeros(side, int)
        return sp.csr_matrix((nu[digits[:, pos]], (rows, np.arange(side))),
                             shape=(int(np.prod(kept_shape, dtype=int)), side))

    tr_rows = sp.csr_matrix((np.ones(side), (b_index, np.arange(side))), shape=(s.r, side))
    eye = sp.identity(side, format="csr")
    nt = k

    def z(m, c):
        return sp.csr_matrix((m, c))

    fams, rhs = [], []
    fam = []
    for _ in sites:
        fam += [eye, -eye]
    fams.append(fam + [z(side, nt)])
    rhs.append(dx)
    for i in range(k):
        for which in (0, 1):
            fam = [z(s.r, side) for _ in range(2 * k)]
            fam[2 * i + which] = tr_rows
            tcol = np.zeros((s.r, nt))
            tcol[:, i] = -1.0
            fams.append(fam + [sp.csr_matrix(tcol)])
            rhs.append(np.zeros(s.r))
    if n >= 2:
        for i, site in enumerate(sites):
            h = hat_rows(s.position(site))
            fam = [z(h.shape[0], side) for _ in range(2 * k)]
            fam[2 * i], fam[2 * i + 1] = h, -h
            fams.append(fam + [z(h.shape[0], nt)])
            rhs.append(np.zeros(h.shape[0]))
    A = sp.bmat(fams, format="csr")
    blocks = [sdp.Block("nonneg", side) for _ in range(2 * k)] + [sdp.Block("nonneg", nt)]
    c = np.zeros(A.shape[1])
    c[-nt:] = 1.0
    sol = sdp.solve(sdp.ConicProgram(blocks, c, A, np.concatenate(rhs)), tol=tol, max_iter=200)
    if sol.status != sdp.OPTIMAL:
        raise RuntimeError(f"diagonal LP did not converge: {sol.status} {sol.message}")
    return float(sol.primal_objective)


# --- sampled decompositions -------------------------------------------------------


def _normalize(m: np.ndarray, system: CompositeSystem) -> np.ndarray:
    """Congruence by ``T^{-1/2} (x) 1_A`` so that the partial trace over A becomes ``1_B``."""
    n = system.n
    t = partial_trace(m, system.dims, range(n, 2 * n))
    w, v = np.linalg.eigh((t + t.conj().T) / 2)
    if w[0] <= 1e-12 * max(1.0, w[-1]):
        raise np.linalg.LinAlgError("partial trace is singular")
    d = np.kron((v / np.sqrt(w)) @ v.conj().T, np.eye(system.q))
    out = d @ m @ d.conj().T
    return (out + out.conj().T) / 2


def _max_shift(base: np.ndarray, x: np.ndarray) -> float:
    """Largest s with base + s x >= 0 for positive definite ``base``."""
    lo = sla.eigh(-x, base, eigvals_only=True)[-1]
    return np.inf if lo <= 0 else 1.0 / lo


def _overlap(hi: np.ndarray, lo: np.ndarray, q: np.ndarray) -> float:
    """Largest c in [0, 1] with hi - c q >= 0 and lo - c q >= 0 (``q`` positive definite)."""
    try:
        c1 = sla.eigh(hi, q, eigvals_only=True)[0]
        c2 = sla.eigh(lo, q, eigvals_only=True)[0]
    except (np.linalg.LinAlgError, ValueError):
        return 0.0
    return float(np.clip(min(c1, c2), 0.0, 1.0))


def _random_psd(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return g @ g.conj().T / d


@dataclass
class SampledBound:
    value: float
    decomposition: list[tuple[int, np.ndarray, np.ndarray, float]] = field(repr=False)
    samples: int


def _chain(eta: Channel, theta: Channel, order: Sequence[int]) -> list[np.ndarray]:
    """Switch sites from ``eta`` to ``theta`` one at a time in the given order."""
    sites = eta.system.sites
    out = [eta.delta]
    for k in range(1, len(order)):
        done = sorted(order[:k])
        rest = [s for s in sites if s not in done]
        out.append(tensor_ordered(reduce_to_subset(theta, done), reduce_to_subset(eta, rest)).delta)
    out.append(theta.delta)
    return out


def _decompose(x: HermitianDifference, base: np.ndarray, frac: float, order, single_site,
               scale: float | None = None) -> tuple[float, list] | None:
    s = x.system
    if scale is None:
        smax = _max_shift(base, x.x)
        if not np.isfinite(smax):
            return None
        scale = frac * smax
    hi_top = base + scale * x.x
    if single_site is not None:
        pairs = [(single_site, hi_top, base)]
    else:
        eta, theta = Channel(s, hi_top), Channel(s, base)
        chain = _chain(eta, theta, order)
        pairs = [(site, a, b) for site, a, b in zip(order, chain[:-1], chain[1:])]
    dec, total = [], 0.0
    for site, hi, lo in pairs:
        if np.max(np.abs(hi - lo)) <= 1e-14:
            continue
        best_c, best_q = 0.0, None
        for cand in (hi, lo, hi + lo):
            try:
                qm = _normalize(cand, s)
            except np.linalg.LinAlgError:
                continue
            c = _overlap(hi, lo, qm)
            if c > best_c:
                best_c, best_q = c, qm
        if best_q is None:
            y, z_ = hi, lo
        else:
            y, z_ = hi - best_c * best_q, lo - best_c * best_q
        t = (1.0 - best_c) / scale
        dec.append((site, y / scale, z_ / scale, t))
        total += t
    return total, dec


def sampled_upper_bound(
    x: HermitianDifference,
    samples: int = 1000,
    seed: int | None = 0,
    channels: tuple[Channel, Channel] | None = None,
    return_decomposition: bool = False,
):
    """Best explicit decomposition found by a randomized search; never uses a solver.

    Each sample picks a base channel ``P``, a shift ``s`` with ``P + s x >= 0``,
    and a site order, telescopes from ``P + s x`` down to ``P``, then peels a
    common channel off each neighbouring pair. Candidate bases include the
    normalized negative part of ``x`` and, if given, the second of
    ``channels`` (so a neighbouring pair certifies its own difference).
    The search hill-climbs around the best base found so far.
    Every accepted decomposition is re-checked with ``certificate_check``.
    """
    s = x.system
    if not np.any(x.x):
        out = SampledBound(0.0, [], 0)
        return out if return_decomposition else 0.0
    rng = np.random.default_rng(seed)
    sites = list(s.sites)
    side = s.side
    # sites j whose reduction kills x: then P + s x and P are neighbouring at j for any P
    flat = active_sites(s) if s.n == 1 else [
        j for j in active_sites(s)
        if np.linalg.norm(reduce_hat_matrix(x.x, s, j)[0]) <= 1e-10 * max(1.0, np.linalg.norm(x.x))
    ]
    w, v = np.linalg.eigh(x.x)
    neg = (v * np.clip(-w, 0.0, None)) @ v.conj().T

    seeds = []
    if channels is not None:
        seeds.append(np.array(channels[1].delta))
    for eps in (1e-6, 1e-3, 1e-1, 1.0):
        seeds.append(neg + eps * np.eye(side) * max(1e-12, float(np.abs(w).max())))
    seeds.append(np.eye(side))

    best: tuple[float, list] | None = None
    best_state = None
    used = 0

    def evaluate(base, frac, order, single, scale=None):
        nonlocal best, best_state
        try:
            if scale is None:
                base = _normalize(base, s)
                np.linalg.cholesky(base)
            got = _decompose(x, base, frac, order, single, scale)
        except np.linalg.LinAlgError:
            return
        if got is None:
            return
        if best is None or got[0] < best[0]:
            report = certificate_check(W1Result(got[0], 0.0, got[1], 0.0, 0.0, 0.0, "optimal", 0), x)
            if report.ok:
                best, best_state = got, (base, frac, order, single) if scale is None else best_state

    def structures():
        out = [(1.0, sites, None)]
        out += [(1.0, None, j) for j in flat]
        return out

    if channels is not None:
        # channels[1] + x = channels[0] is a channel, so the shift 1 is exact
        # even when channels[1] is singular
        for frac, order, single in structures():
            evaluate(np.array(channels[1].delta), 1.0, order if order is not None else sites, single, 1.0)
            used += 1
    for base in seeds:
        for frac, order, single in structures():
            if used >= samples:
                break
            evaluate(base, frac, order if order is not None else sites, single)
            used += 1
    while used < samples:
        if best_state is not None and rng.random() < 0.7:
            base, frac, order, single = best_state
            step = 10.0 ** rng.uniform(-4, -0.5)
            base = (1 - step) * base + step * _normalize(_random_psd(side, rng), s)
            frac = float(np.clip(frac * (1 + 0.05 * rng.normal()), 0.05, 1.0)) if rng.random() < 0.3 else frac
            if single is None and len(sites) > 1 and rng.random() < 0.3:
                order = list(rng.permutation(sites))
        else:
            base = _normalize(_random_psd(side, rng), s)
            frac = float(rng.uniform(0.3, 1.0))
            single = flat[rng.integers(len(flat))] if flat and rng.random() < 0.5 else None
            order = list(rng.permutation(sites))
        evaluate(base, frac, [int(o) for o in order], single)
        used += 1
    if best is None:
        out = SampledBound(np.inf, [], used)
    else:
        out = SampledBound(float(best[0]), best[1], used)
    return out if return_decomposition else out.value


# --- certificate audit ------------------------------------------------------------


@dataclass
class CertificateReport:
    sum_residual: float
    trace_residual: float
    hat_residual: float
    min_eigenvalue: float
    min_t: float
    value_residual: float
    flags: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.flags

    def __bool__(self) -> bool:
        return self.ok

    @property
    def max_residual(self) -> float:
        return max(self.sum_residual, self.trace_residual, self.hat_residual,
                   max(0.0, -self.min_eigenvalue), max(0.0, -self.min_t))


def certificate_check(res: W1Result, x: HermitianDifference, tol: float = CERT_TOL,
                      value_tol: float = VALUE_TOL) -> CertificateReport:
    """Audit a returned decomposition against the gauge constraints, from scratch."""
    s = x.system
    n = s.n
    eye_b = np.eye(s.r)
    total = np.zeros_like(x.x)
    tr_res = hat_res = 0.0
    min_eig = np.inf
    min_t = np.inf
    t_sum = 0.0
    for site, y, z, t in res.decomposition:
        y, z = np.asarray(y), np.asarray(z)
        total = total + (y - z)
        t_sum += float(t)
        min_t = min(min_t, float(t))
        for m in (y, z):
            herm = float(np.max(np.abs(m - m.conj().T), initial=0.0))
            tr_res = max(tr_res, herm)
            min_eig = min(min_eig, float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0]))
            ptr = partial_trace(m, s.dims, range(n, 2 * n))
            tr_res = max(tr_res, float(np.max(np.abs(ptr - t * eye_b), initial=0.0)))
        if n >= 2:
            hy = reduce_hat_matrix(y, s, site)[0]
            hz = reduce_hat_matrix(z, s, site)[0]
            hat_res = max(hat_res, float(np.max(np.abs(hy - hz), initial=0.0)))
    sum_res = float(np.max(np.abs(total - x.x), initial=0.0))
    if min_eig == np.inf:
        min_eig = 0.0
    if min_t == np.inf:
        min_t = 0.0
    val_res = abs(t_sum - res.value)
    rep = CertificateReport(sum_res, tr_res, hat_res, min_eig, min_t, val_res)
    for name, v in (("sum", sum_res), ("partial trace", tr_res), ("reduction", hat_res)):
        if v > tol:
            rep.flags.append(f"{name} residual {v:.3g} > {tol:g}")
    if min_eig < -tol:
        rep.flags.append(f"block eigenvalue {min_eig:.3g} < -{tol:g}")
    if min_t < -tol:
        rep.flags.append(f"negative scale {min_t:.3g}")
    if val_res > value_tol:
        rep.flags.append(f"|sum t - value| = {val_res:.3g} > {value_tol:g}")
    return rep


def diagonal_difference(system: CompositeSystem, rng: np.random.Generator) -> HermitianDifference:
    """Difference of two random classical (diagonal) channels."""
    def classical():
        m = rng.random((system.r, system.q)) + 1e-3
        m /= m.sum(axis=1, keepdims=True)
        return np.diag(m.reshape(-1)).astype(complex)
    return HermitianDifference(system, classical() - classical())


def diagonal_system(dims: Sequence[int], out_dims: Sequence[int] | None = None) -> CompositeSystem:
    out = tuple(out_dims) if out_dims is not None else tuple(dims)
    return CompositeSystem(out_dims=out, in_dims=tuple(dims))


__all__ = [
    "trace_distance_oracle",
    "diagonal_gauge_upper_bound",
    "sampled_upper_bound",
    "SampledBound",
    "certificate_check",
    "CertificateReport",
    "diagonal_difference",
    "diagonal_system",
]

