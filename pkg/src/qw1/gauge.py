"""The W1 norm on channel differences as a semidefinite program.

For a target ``x`` (Hermitian, ``Tr_A x = 0``) the norm is the gauge of the
convex hull of all neighbouring differences. Each set of neighbouring
differences at one site is convex, so

    ||x|| = min sum_j t_j
            s.t. sum_j (Y_j - Z_j) = x,
                 Y_j, Z_j >= 0,  Tr_A Y_j = Tr_A Z_j = t_j 1_B,
                 hat_j(Y_j) = hat_j(Z_j)          (n >= 2 only)

with ``Y_j / t_j`` and ``Z_j / t_j`` the two neighbouring channels of the
``j``-th term. Sites with ``q_j = r_j = 1`` admit only the zero difference
and are left out.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import sdp
from .channels import (
    Channel,
    CompositeSystem,
    check_partition,
    reduce_matrix_to_subset,
    reduce_hat_matrix,
    reduce_to_subset,
    state_channel,
    tensor_ordered,
)
from .sdp import Block, ConicProgram, hmat, hvec
from .tensor import check_density_matrix, is_hermitian, partial_trace

TARGET_TOL = 1e-9

OPTIMAL = "optimal"
MAX_ITERATIONS = "max_iterations"
INFEASIBLE_NUMERICS = "infeasible_numerics"


@dataclass(frozen=True, eq=False)
class HermitianDifference:
    """An element of the difference space: Hermitian, vanishing partial trace over A."""

    system: CompositeSystem
    x: np.ndarray = field(repr=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=complex)
        side = self.system.side
        if x.shape != (side, side):
            raise ValueError(f"difference of shape {x.shape}, expected ({side}, {side})")
        scale = max(1.0, float(np.abs(x).max(initial=0.0)))
        if not is_hermitian(x, 1e-10 * scale):
            raise ValueError("difference is not Hermitian")
        s = self.system
        res = np.linalg.norm(partial_trace(x, s.dims, range(s.n, 2 * s.n)))
        if res > TARGET_TOL * scale:
            raise ValueError(f"partial trace over A is not zero (residual {res:.3g})")
        x = (x + x.conj().T) / 2
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @classmethod
    def between(cls, a: Channel, b: Channel) -> "HermitianDifference":
        if not a.system.same_as(b.system):
            raise ValueError(f"system mismatch: {a.system} vs {b.system}")
        return cls(a.system, a.delta - b.delta)

    def __mul__(self, alpha: float) -> "HermitianDifference":
        return HermitianDifference(self.system, float(alpha) * self.x)

    __rmul__ = __mul__

    def __add__(self, other: "HermitianDifference") -> "HermitianDifference":
        return HermitianDifference(self.system, self.x + other.x)


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 200
    warm_start: bool = True
    embed: bool = False
    verbose: bool = False


@dataclass(eq=False)
class GaugeProgram:
    system: CompositeSystem
    target: HermitianDifference
    sites: list[int]  # sites with a block pair, in block order
    conic: ConicProgram

    def unpack(self, xv: np.ndarray) -> list[tuple[int, np.ndarray, np.ndarray, float]]:
        vals = self.conic.unpack(xv)
        t = vals[-1]
        return [(s, vals[2 * i], vals[2 * i + 1], float(t[i])) for i, s in enumerate(self.sites)]

    def pack(self, decomposition: Sequence[tuple[int, np.ndarray, np.ndarray, float]]) -> np.ndarray:
        mats = []
        for _, y, z, _ in decomposition:
            mats += [y, z]
        mats.append(np.array([t for *_, t in decomposition], dtype=float))
        return self.conic.pack(mats)


@dataclass(eq=False)
class W1Result:
    value: float
    lower_bound: float
    decomposition: list[tuple[int, np.ndarray, np.ndarray, float]] = field(repr=False)
    duality_gap: float
    primal_residual: float
    dual_residual: float
    status: str
    iterations: int
    message: str = ""

    @property
    def relative_gap(self) -> float:
        return self.duality_gap / (1.0 + abs(self.value))


def _basis(d: int) -> np.ndarray:
    return hmat(np.eye(d * d), d)


def _map_matrix(f, d_in: int, chunk: int = 512) -> np.ndarray:
    """Matrix of a linear Hermiticity-preserving map in hvec coordinates."""
    n_in = d_in * d_in
    cols = []
    eye = np.eye(n_in)
    for start in range(0, n_in, chunk):
        basis = hmat(eye[start : start + chunk], d_in)
        cols.append(hvec(f(basis)))
    out = np.concatenate(cols, axis=0).T
    out[np.abs(out) < 1e-15] = 0.0
    return out


def _untraced_coordinates(rb: int, qa: int) -> np.ndarray:
    """hvec coordinates on B (x) A (sides rb, qa) that are not fixed by the partial trace over A.

    Entries at index pairs ((b1, 0), (b2, 0)) are determined by the others
    together with Tr_A, so dropping them leaves a complement of the
    partial-trace rows.
    """
    d = rb * qa
    iu, ju = np.triu_indices(d, 1)
    keep_diag = np.arange(d) % qa != 0
    keep_up = (iu % qa != 0) | (ju % qa != 0)
    return np.flatnonzero(np.concatenate([keep_diag, keep_up, keep_up]))


def active_sites(system: CompositeSystem) -> list[int]:
    return [s for s, q, r in zip(system.sites, system.in_dims, system.out_dims) if q * r > 1]


def build_program(target: HermitianDifference) -> GaugeProgram:
    s = target.system
    n, side, r = s.n, s.side, s.r
    sites = active_sites(s)
    k = len(sites)
    N = side * side
    nb = r * r

    tr_a = sp.csr_matrix(_map_matrix(lambda m: partial_trace(m, s.dims, range(n, 2 * n)), side))
    unit_b = hvec(np.eye(r))

    blocks = []
    for _ in sites:
        blocks += [Block("hermitian", side), Block("hermitian", side)]
    blocks.append(Block("nonneg", max(k, 1)))
    nt = max(k, 1)

    rows: list[list] = []  # one list of column blocks per row family
    rhs = []

    def zeros(m, cols):
        return sp.csr_matrix((m, cols))

    # (i) sum_j (Y_j - Z_j) = x
    eye_n = sp.identity(N, format="csr")
    fam = []
    for _ in sites:
        fam += [eye_n, -eye_n]
    fam.append(zeros(N, nt))
    rows.append(fam)
    rhs.append(hvec(target.x))

    # (ii) Tr_A Y_j = t_j 1_B, Tr_A Z_j = t_j 1_B. Summing (i) over A gives
    # sum_j Tr_A (Y_j - Z_j) = 0, so the Z rows of the last pair are implied.
    for i, _ in enumerate(sites):
        for which in ((0,) if i == k - 1 else (0, 1)):
            fam = [zeros(nb, N) for _ in range(2 * k)]
            fam[2 * i + which] = tr_a
            tcol = np.zeros((nb, nt))
            tcol[:, i] = -unit_b
            fam.append(sp.csr_matrix(tcol))
            rows.append(fam)
            rhs.append(np.zeros(nb))

    # (iii) hat_j(Y_j) = hat_j(Z_j); implied by (ii) when n == 1
    if n >= 2:
        for i, site in enumerate(sites):
            hat = _map_matrix(lambda m, site=site: reduce_hat_matrix(m, s, site)[0], side)
            pos = s.position(site)
            hat = sp.csr_matrix(hat[_untraced_coordinates(s.r // s.out_dims[pos], s.q // s.in_dims[pos])])
            fam = [zeros(hat.shape[0], N) for _ in range(2 * k)]
            fam[2 * i] = hat
            fam[2 * i + 1] = -hat
            fam.append(zeros(hat.shape[0], nt))
            rows.append(fam)
            rhs.append(np.zeros(hat.shape[0]))

    A = sp.bmat(rows, format="csr")
    c = np.zeros(A.shape[1])
    c[-nt:] = 1.0 if k else 0.0
    conic = ConicProgram(blocks, c, A, np.concatenate(rhs))
    return GaugeProgram(s, target, sites, conic)


# --- telescoping decomposition ---------------------------------------------


def telescope_channels(a: Channel, b: Channel) -> list[Channel]:
    """The chain ``a = P_0, P_1, ..., P_n = b`` with ``P_j = b_{<=j} (x) a_{>j}`` (site order).

    Consecutive members differ by a neighbouring difference at site ``j``.
    """
    if not a.system.same_as(b.system):
        raise ValueError(f"system mismatch: {a.system} vs {b.system}")
    sites = a.system.sites
    chain = [a]
    for j in range(1, len(sites)):
        head = reduce_to_subset(b, sites[:j])
        tail = reduce_to_subset(a, sites[j:])
        chain.append(tensor_ordered(head, tail))
    chain.append(b)
    return chain


def _channels_for_difference(x: HermitianDifference) -> tuple[Channel, Channel, float]:
    """Channels ``eta, theta`` and scale ``s`` with ``x = (eta - theta) / s``."""
    sys_ = x.system
    base = np.kron(np.eye(sys_.r), np.eye(sys_.q) / sys_.q)
    op = float(np.max(np.abs(np.linalg.eigvalsh(x.x)), initial=0.0))
    scale = 0.5 / (sys_.q * op) if op > 0 else 1.0
    return Channel(sys_, base + scale * x.x), Channel(sys_, base), scale


def telescope_point(x: HermitianDifference, a: Channel | None = None, b: Channel | None = None):
    """Feasible decomposition ``[(site, Y, Z, t)]`` of ``x`` from the telescoping chain."""
    if a is None:
        a, b, scale = _channels_for_difference(x)
    else:
        scale = 1.0
    chain = telescope_channels(a, b)
    act = set(active_sites(x.system))
    out = []
    for site, hi, lo in zip(x.system.sites, chain[:-1], chain[1:]):
        if site in act:
            out.append((site, hi.delta / scale, lo.delta / scale, 1.0 / scale))
    return out


def _interior_start(prog: GaugeProgram, a: Channel | None, b: Channel | None, theta: float = 0.1) -> np.ndarray:
    """Telescoping point pushed into the interior by adding c*1 to both blocks of every pair."""
    dec = telescope_point(prog.target, a, b)
    q, side = prog.system.q, prog.system.side
    shifted = []
    for site, y, z, t in dec:
        c = theta * t / q
        shifted.append((site, y + c * np.eye(side), z + c * np.eye(side), t + c * q))
    return prog.pack(shifted)


# --- evaluation ---------------------------------------------------------------------


def _status(conic_status: str) -> str:
    if conic_status == sdp.OPTIMAL:
        return OPTIMAL
    if conic_status == sdp.MAX_ITERATIONS:
        return MAX_ITERATIONS
    return INFEASIBLE_NUMERICS


def _solve_program(prog: GaugeProgram, opts: SolverOptions, a=None, b=None) -> W1Result:
    if not prog.sites:
        # every site trivial: the difference space is {0}
        return W1Result(0.0, 0.0, [], 0.0, 0.0, 0.0, OPTIMAL, 0)
    x0 = _interior_start(prog, a, b) if opts.warm_start else None
    if opts.embed:
        emb = sdp.embed_hermitian(prog.conic)
        x0e = None
        if x0 is not None:
            x0e = np.concatenate([
                sdp.svec(np.block([[m.real, -m.imag], [m.imag, m.real]])) if bl.kind == "hermitian" else v
                for bl, v, m in zip(prog.conic.blocks, prog.conic.split(x0), prog.conic.unpack(x0))
            ])
        sol = sdp.solve(emb, tol=opts.tol, max_iter=opts.max_iter, x0=x0e, verbose=opts.verbose)
        xv = sdp.extract_hermitian(prog.conic, emb, sol.x)
        dobj = sol.dual_objective / 2
        gap = sol.gap / 2
    else:
        sol = sdp.solve(prog.conic, tol=opts.tol, max_iter=opts.max_iter, x0=x0, verbose=opts.verbose)
        xv = sol.x
        dobj, gap = sol.dual_objective, sol.gap
    dec = prog.unpack(xv)
    value = float(sum(t for *_, t in dec))
    return W1Result(
        value=value,
        lower_bound=dobj,
        decomposition=dec,
        duality_gap=gap,
        primal_residual=sol.primal_residual,
        dual_residual=sol.dual_residual,
        status=_status(sol.status),
        iterations=sol.iterations,
        message=sol.message,
    )


def w1_norm(x: HermitianDifference, opts: SolverOptions | None = None) -> W1Result:
    opts = opts or SolverOptions()
    if not np.any(x.x):
        return W1Result(0.0, 0.0, [(s, np.zeros_like(x.x), np.zeros_like(x.x), 0.0) for s in active_sites(x.system)],
                        0.0, 0.0, 0.0, OPTIMAL, 0)
    return _solve_program(build_program(x), opts)


def w1_distance(a: Channel, b: Channel, opts: SolverOptions | None = None) -> W1Result:
    opts = opts or SolverOptions()
    x = HermitianDifference.between(a, b)
    if not np.any(x.x):
        return w1_norm(x, opts)
    return _solve_program(build_program(x), opts, a, b)


@dataclass
class TelescopeBound:
    bound: float
    coarse_bound: int
    pieces: list[HermitianDifference]
    piece_values: list[float]


def telescope_pieces(a: Channel, b: Channel) -> list[HermitianDifference]:
    chain = telescope_channels(a, b)
    return [HermitianDifference(a.system, hi.delta - lo.delta) for hi, lo in zip(chain[:-1], chain[1:])]


def telescope_bound(a: Channel, b: Channel, opts: SolverOptions | None = None, zero_tol: float = 1e-12) -> TelescopeBound:
    pieces = telescope_pieces(a, b)
    values = []
    for piece in pieces:
        if np.linalg.norm(piece.x) <= zero_tol:
            values.append(0.0)
        else:
            values.append(w1_norm(piece, opts).value)
    coarse = sum(1 for piece in pieces if np.linalg.norm(piece.x) > zero_tol)
    return TelescopeBound(float(sum(values)), coarse, pieces, values)


def reduction_lower_bound(a: Channel, b: Channel, partition: Sequence[Sequence[int]], opts: SolverOptions | None = None) -> float:
    parts = check_partition(partition, a.system.sites)
    total = 0.0
    for part in parts:
        total += w1_distance(reduce_to_subset(a, part), reduce_to_subset(b, part), opts).value
    return total


def reduce_difference(x: HermitianDifference, keep: Sequence[int]) -> HermitianDifference:
    m, sub = reduce_matrix_to_subset(x.x, x.system, keep)
    return HermitianDifference(sub, m)


def state_w1(rho: np.ndarray, sigma: np.ndarray, dims: Sequence[int], opts: SolverOptions | None = None) -> W1Result:
    """W1 distance between two states on ``A_1 (x) ... (x) A_n`` (all output factors trivial)."""
    rho, sigma = np.asarray(rho), np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"shape mismatch: {rho.shape} vs {sigma.shape}")
    check_density_matrix(rho, 1e-9)
    check_density_matrix(sigma, 1e-9)
    return w1_distance(state_channel(rho, dims), state_channel(sigma, dims), opts)
