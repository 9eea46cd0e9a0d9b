"""Composite systems and channels between them.

A channel ``E: A -> B`` (Heisenberg picture, unital and completely positive)
is stored as its matrix ``delta`` on ``B (x) A`` with factor order
``(B_1, ..., B_n, A_1, ..., A_n)``, defined by

    E(a) = Tr_A[delta (1_B (x) a^T)]

with the transpose taken in the computational basis. With this convention
``delta`` is the Choi matrix ``sum_mn E(|m><n|) (x) |m><n|``, so complete
positivity is ``delta >= 0`` and unitality is ``Tr_A delta = 1_B``.

Factors carry *site labels* (0-based integers). A channel on the whole system
uses sites ``0..n-1``; reductions keep the labels of the surviving factors,
which is what lets :func:`tensor_ordered` put factors back in global order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .tensor import (
    check_density_matrix,
    is_hermitian,
    partial_trace,
    partial_transpose,
    permute_factors,
    state_contract,
)

VALID_TOL = 1e-9


def maximally_mixed(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex) / d


@dataclass(frozen=True, eq=False)
class CompositeSystem:
    """Factor dimensions ``in_dims`` (A side), ``out_dims`` (B side) and reference states on B."""

    in_dims: tuple[int, ...]
    out_dims: tuple[int, ...]
    ref_states: tuple[np.ndarray, ...] | None = None
    sites: tuple[int, ...] | None = None

    def __post_init__(self):
        in_dims = tuple(int(d) for d in self.in_dims)
        out_dims = tuple(int(d) for d in self.out_dims)
        if len(in_dims) == 0 or len(in_dims) != len(out_dims):
            raise ValueError("in_dims and out_dims must be non-empty and of equal length")
        if any(d < 1 for d in in_dims + out_dims):
            raise ValueError("all factor dimensions must be >= 1")
        n = len(in_dims)
        refs = self.ref_states
        if refs is None:
            refs = tuple(maximally_mixed(r) for r in out_dims)
        refs = tuple(np.asarray(s, dtype=complex) for s in refs)
        if len(refs) != n:
            raise ValueError(f"expected {n} reference states, got {len(refs)}")
        for s, r in zip(refs, out_dims):
            if s.shape != (r, r):
                raise ValueError(f"reference state of shape {s.shape} on factor of dim {r}")
            check_density_matrix(s)
        sites = tuple(range(n)) if self.sites is None else tuple(int(s) for s in self.sites)
        if len(sites) != n or list(sites) != sorted(set(sites)):
            raise ValueError(f"sites {sites} must be {n} strictly increasing labels")
        object.__setattr__(self, "in_dims", in_dims)
        object.__setattr__(self, "out_dims", out_dims)
        object.__setattr__(self, "ref_states", refs)
        object.__setattr__(self, "sites", sites)

    @property
    def n(self) -> int:
        return len(self.in_dims)

    @property
    def q(self) -> int:
        return int(np.prod(self.in_dims))

    @property
    def r(self) -> int:
        return int(np.prod(self.out_dims))

    @property
    def dims(self) -> tuple[int, ...]:
        """Factor dimensions of a delta matrix: ``(r_1..r_n, q_1..q_n)``."""
        return self.out_dims + self.in_dims

    @property
    def side(self) -> int:
        return self.r * self.q

    def position(self, site: int) -> int:
        try:
            return self.sites.index(int(site))
        except ValueError:
            raise IndexError(f"site {site} not in {self.sites}") from None

    def subsystem(self, sites: Iterable[int]) -> "CompositeSystem":
        pos = [self.position(s) for s in sorted(set(sites))]
        return CompositeSystem(
            tuple(self.in_dims[p] for p in pos),
            tuple(self.out_dims[p] for p in pos),
            tuple(self.ref_states[p] for p in pos),
            tuple(self.sites[p] for p in pos),
        )

    def same_as(self, other: "CompositeSystem", tol: float = 1e-12) -> bool:
        return (
            self.in_dims == other.in_dims
            and self.out_dims == other.out_dims
            and self.sites == other.sites
            and all(np.allclose(a, b, atol=tol, rtol=0) for a, b in zip(self.ref_states, other.ref_states))
        )

    def __repr__(self):
        return f"CompositeSystem(in_dims={self.in_dims}, out_dims={self.out_dims}, sites={self.sites})"


@dataclass(frozen=True, eq=False)
class Channel:
    """A channel stored as its delta matrix.

    Construction checks shapes and Hermiticity only; use :func:`is_valid`
    for positivity and unitality.
    """

    system: CompositeSystem
    delta: np.ndarray = field(repr=False)

    def __post_init__(self):
        delta = np.asarray(self.delta, dtype=complex)
        side = self.system.side
        if delta.shape != (side, side):
            raise ValueError(f"delta of shape {delta.shape}, expected ({side}, {side})")
        if not is_hermitian(delta, 1e-10 * max(1.0, float(np.abs(delta).max(initial=0.0)))):
            raise ValueError("delta is not Hermitian")
        delta = (delta + delta.conj().T) / 2
        delta.setflags(write=False)
        object.__setattr__(self, "delta", delta)


def _check_same_system(a: Channel, b: Channel) -> None:
    if not a.system.same_as(b.system):
        raise ValueError(f"system mismatch: {a.system} vs {b.system}")


# --- representations -------------------------------------------------------


def channel_from_kraus(system: CompositeSystem, kraus: Sequence[np.ndarray], tol: float = VALID_TOL) -> Channel:
    """Channel ``E(a) = sum_i K_i^dag a K_i`` from operators of shape ``(q, r)``."""
    q, r = system.q, system.r
    ops = [np.asarray(k, dtype=complex) for k in kraus]
    if not ops:
        raise ValueError("empty Kraus set")
    for k in ops:
        if k.shape != (q, r):
            raise ValueError(f"Kraus operator of shape {k.shape}, expected ({q}, {r})")
    unit = sum(k.conj().T @ k for k in ops)
    err = np.linalg.norm(unit - np.eye(r))
    if err > tol:
        raise ValueError(f"Kraus set is not unital: ||sum K^dag K - 1|| = {err:.3g}")
    vecs = np.stack([k.conj().T.reshape(-1) for k in ops], axis=1)
    return Channel(system, vecs @ vecs.conj().T)


def kraus_from_channel(ch: Channel, cutoff: float = 1e-12) -> list[np.ndarray]:
    """Kraus operators from the eigendecomposition of delta; near-zero eigenvalues are dropped."""
    q, r = ch.system.q, ch.system.r
    w, v = np.linalg.eigh(ch.delta)
    scale = max(1.0, float(w[-1]))
    ops = []
    for lam, vec in zip(w[::-1], v[:, ::-1].T):
        if lam <= cutoff * scale:
            break
        ops.append((np.sqrt(lam) * vec).reshape(r, q).conj().T)
    return ops


def apply_channel(ch: Channel, a: np.ndarray) -> np.ndarray:
    """Heisenberg-picture action ``E(a)``; ``a`` is ``q x q``, the result ``r x r``."""
    q, r = ch.system.q, ch.system.r
    a = np.asarray(a)
    if a.shape != (q, q):
        raise ValueError(f"observable of shape {a.shape}, expected ({q}, {q})")
    return np.einsum("kmln,mn->kl", ch.delta.reshape(r, q, r, q), a)


def schrodinger_apply(ch: Channel, rho: np.ndarray) -> np.ndarray:
    """Predual map: ``Tr[E(a) rho] = Tr[a E_*(rho)]``; ``rho`` is ``r x r``, the result ``q x q``."""
    q, r = ch.system.q, ch.system.r
    rho = np.asarray(rho)
    if rho.shape != (r, r):
        raise ValueError(f"state of shape {rho.shape}, expected ({r}, {r})")
    return np.einsum("kmln,lk->nm", ch.delta.reshape(r, q, r, q), rho)


def choi_state_from_channel(ch: Channel) -> np.ndarray:
    """The density matrix ``(1/r) sum_ij |i><j| (x) E_*(|i><j|)`` on ``B (x) A``."""
    q, r = ch.system.q, ch.system.r
    kappa = np.zeros((r * q, r * q), dtype=complex)
    for i, j in itertools.product(range(r), repeat=2):
        unit = np.zeros((r, r), dtype=complex)
        unit[i, j] = 1.0
        kappa += np.kron(unit, schrodinger_apply(ch, unit))
    return kappa / r


def delta_from_choi_state(kappa: np.ndarray, system: CompositeSystem) -> np.ndarray:
    """Inverse of :func:`choi_state_from_channel`: ``delta = r * kappa^T``.

    The transpose acts on both the B and the A factors (B first, then A).
    Transposing B alone gives the delta of the transpose-composed map, which
    is not positive for e.g. the identity channel.
    """
    n = system.n
    out = partial_transpose(np.asarray(kappa), system.dims, range(n))
    out = partial_transpose(out, system.dims, range(n, 2 * n))
    return system.r * out


def replacement_channel(system: CompositeSystem, state: np.ndarray) -> Channel:
    """``E(a) = Tr(state a) 1_B`` for a density matrix ``state`` on A."""
    state = np.asarray(state, dtype=complex)
    check_density_matrix(state)
    if state.shape != (system.q, system.q):
        raise ValueError(f"state of shape {state.shape}, expected ({system.q}, {system.q})")
    return Channel(system, np.kron(np.eye(system.r), state.T))


def identity_channel(system: CompositeSystem) -> Channel:
    if system.in_dims != system.out_dims:
        raise ValueError("identity channel needs in_dims == out_dims")
    return channel_from_kraus(system, [np.eye(system.q)])


# --- reductions --------------------------------------------------------------


def reduce_hat_matrix(m: np.ndarray, system: CompositeSystem, site: int) -> tuple[np.ndarray, CompositeSystem]:
    """Remove ``site``: partial trace over its A factor, contraction of its B factor with the reference state.

    Works on any delta-shaped matrix (channels and their differences alike).
    """
    if system.n < 2:
        raise ValueError("reduction needs at least two factors")
    p = system.position(site)
    n = system.n
    dims = system.dims
    out = partial_trace(np.asarray(m), dims, [n + p])
    dims = dims[: n + p] + dims[n + p + 1 :]
    out = state_contract(out, dims, p, system.ref_states[p])
    return out, system.subsystem(s for s in system.sites if s != site)


def reduce_matrix_to_subset(m: np.ndarray, system: CompositeSystem, keep: Iterable[int]) -> tuple[np.ndarray, CompositeSystem]:
    keep = sorted(set(int(s) for s in keep))
    if not keep:
        raise ValueError("subset must be non-empty")
    for s in keep:
        system.position(s)
    out = np.asarray(m)
    for s in system.sites:
        if s not in keep:
            out, system = reduce_hat_matrix(out, system, s)
    return out, system


def reduce_hat(ch: Channel, site: int) -> Channel:
    delta, sub = reduce_hat_matrix(ch.delta, ch.system, site)
    return Channel(sub, delta)


def reduce_to_subset(ch: Channel, keep: Iterable[int]) -> Channel:
    delta, sub = reduce_matrix_to_subset(ch.delta, ch.system, keep)
    return Channel(sub, delta)


def tensor_ordered(lhs: Channel, rhs: Channel) -> Channel:
    """Tensor product of channels on disjoint site sets, factors sorted by site label."""
    sl, sr = lhs.system, rhs.system
    if set(sl.sites) & set(sr.sites):
        raise ValueError(f"overlapping sites {sl.sites} and {sr.sites}")
    sites = sl.sites + sr.sites
    nl, n = sl.n, sl.n + sr.n
    # kron layout: (B_l, A_l, B_r, A_r)
    dims = sl.out_dims + sl.in_dims + sr.out_dims + sr.in_dims
    b_pos = list(range(nl)) + [2 * nl + k for k in range(sr.n)]
    a_pos = [nl + k for k in range(nl)] + [2 * nl + sr.n + k for k in range(sr.n)]
    order = sorted(range(n), key=lambda k: sites[k])
    perm = [b_pos[k] for k in order] + [a_pos[k] for k in order]
    delta = permute_factors(np.kron(lhs.delta, rhs.delta), dims, perm)
    refs = sl.ref_states + sr.ref_states
    system = CompositeSystem(
        tuple((sl.in_dims + sr.in_dims)[k] for k in order),
        tuple((sl.out_dims + sr.out_dims)[k] for k in order),
        tuple(refs[k] for k in order),
        tuple(sites[k] for k in order),
    )
    return Channel(system, delta)


def tensor_all(channels: Sequence[Channel]) -> Channel:
    out = channels[0]
    for ch in channels[1:]:
        out = tensor_ordered(out, ch)
    return out


# --- predicates --------------------------------------------------------------


def is_neighbouring(a: Channel, b: Channel, tol: float = 1e-9) -> tuple[bool, int | None]:
    """Whether some single-site reduction of ``a`` and ``b`` agrees; returns the smallest such site."""
    _check_same_system(a, b)
    if a.system.n == 1:
        # the only reduction contracts everything and both give the scalar 1
        return True, a.system.sites[0]
    for s in a.system.sites:
        da, _ = reduce_hat_matrix(a.delta, a.system, s)
        db, _ = reduce_hat_matrix(b.delta, b.system, s)
        if np.linalg.norm(da - db) <= tol:
            return True, s
    return False, None


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    min_eigenvalue: float
    trace_residual: float
    unitality_residual: float

    def __bool__(self):
        return self.valid


def is_valid(ch: Channel, tol: float = VALID_TOL) -> ValidityReport:
    s = ch.system
    min_eig = float(np.linalg.eigvalsh(ch.delta)[0])
    tr_a = partial_trace(ch.delta, s.dims, range(s.n, 2 * s.n))
    trace_res = float(np.linalg.norm(tr_a - np.eye(s.r)))
    unit_res = float(np.linalg.norm(apply_channel(ch, np.eye(s.q)) - np.eye(s.r)))
    ok = min_eig >= -tol and trace_res <= tol
    return ValidityReport(ok, min_eig, trace_res, unit_res)


# --- sampling ------------------------------------------------------------------


def random_kraus(system: CompositeSystem, rank: int, rng: np.random.Generator) -> list[np.ndarray]:
    if rank < 1:
        raise ValueError("rank must be >= 1")
    q, r = system.q, system.r
    if rank * q < r:
        raise ValueError(f"no unital Kraus set of rank {rank} maps a {q}-dim input to {r}-dim output")
    gs = [rng.standard_normal((q, r)) + 1j * rng.standard_normal((q, r)) for _ in range(rank)]
    m = sum(g.conj().T @ g for g in gs)
    w, v = np.linalg.eigh(m)
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    return [g @ inv_sqrt for g in gs]


def random_channel(system: CompositeSystem, rank: int, seed: int | np.random.Generator) -> Channel:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return channel_from_kraus(system, random_kraus(system, rank, rng))


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    g = rng.standard_normal((d, rank or d)) + 1j * rng.standard_normal((d, rank or d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def state_system(dims: Sequence[int]) -> CompositeSystem:
    """System whose channels are the states on ``A = A_1 (x) ... (x) A_n`` (all B factors trivial)."""
    return CompositeSystem(tuple(dims), (1,) * len(dims))


def state_channel(rho: np.ndarray, dims: Sequence[int]) -> Channel:
    check_density_matrix(np.asarray(rho))
    return Channel(state_system(dims), rho)


def check_partition(parts: Sequence[Sequence[int]], sites: Sequence[int]) -> list[tuple[int, ...]]:
    parts = [tuple(sorted(int(s) for s in p)) for p in parts]
    flat = [s for p in parts for s in p]
    if any(len(p) == 0 for p in parts) or len(flat) != len(set(flat)) or sorted(flat) != sorted(sites):
        raise ValueError(f"{parts} is not a partition of {tuple(sites)}")
    return parts


def set_partitions(items: Sequence[int]):
    """All partitions of ``items`` into non-empty blocks."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [(first,) + tuple(part[i])] + part[i + 1 :]
        yield [(first,)] + part
