"""Dense linear algebra on tensor-factored index spaces.

Matrices are plain complex ``numpy`` arrays. A factorization of a square
matrix of side ``d`` is a sequence of factor dimensions whose product is
``d``; factor ``k`` is addressed by its 0-based position in that sequence.
``partial_trace`` and ``state_contract`` also accept stacks of matrices
(leading batch axes).
"""
from __future__ import annotations

import string
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
STATE_TOL = 1e-10


def _check_square(m: np.ndarray, dims: Sequence[int]) -> int:
    total = int(np.prod(dims, dtype=np.int64)) if len(dims) else 1
    if any(int(d) < 1 for d in dims):
        raise ValueError(f"factor dimensions must be >= 1, got {tuple(dims)}")
    if m.ndim < 2 or m.shape[-2:] != (total, total):
        raise ValueError(
            f"matrix of shape {m.shape} does not match factor dims {tuple(dims)}"
        )
    return total


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(
        np.max(np.abs(m - m.conj().T), initial=0.0) <= tol
    )


def kron(*mats: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def permute_factors(m: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: factor ``i`` of the result is factor ``perm[i]`` of ``m``.

    Equivalent to conjugation by the unitary that permutes the factors, done
    by index arithmetic.
    """
    dims = tuple(int(d) for d in dims)
    _check_square(m, dims)
    if m.ndim != 2:
        raise ValueError("permute_factors takes a single matrix")
    n = len(dims)
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of {n} factors")
    t = np.asarray(m).reshape(dims + dims)
    t = t.transpose(perm + tuple(n + p for p in perm))
    side = m.shape[0]
    return np.ascontiguousarray(t).reshape(side, side)


def partial_trace(m: np.ndarray, dims: Sequence[int], traced: Sequence[int]) -> np.ndarray:
    """Trace out the factors listed in ``traced``; the remaining factors keep their order."""
    dims = tuple(int(d) for d in dims)
    _check_square(m, dims)
    n = len(dims)
    traced = sorted(set(int(k) for k in traced))
    if any(k < 0 or k >= n for k in traced):
        raise IndexError(f"traced factors {traced} out of range for {n} factors")
    letters = string.ascii_letters
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for k in traced:
        col[k] = row[k]
    keep = [k for k in range(n) if k not in traced]
    out = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    m = np.asarray(m)
    lead = m.shape[:-2]
    t = np.einsum("..." + "".join(row) + "".join(col) + "->..." + out, m.reshape(lead + dims + dims))
    side = int(np.prod([dims[k] for k in keep], dtype=np.int64)) if keep else 1
    return t.reshape(lead + (side, side))


def partial_transpose(m: np.ndarray, dims: Sequence[int], factors: Sequence[int]) -> np.ndarray:
    """Transpose the listed factors in the computational basis."""
    dims = tuple(int(d) for d in dims)
    _check_square(m, dims)
    if m.ndim != 2:
        raise ValueError("partial_transpose takes a single matrix")
    n = len(dims)
    axes = list(range(2 * n))
    for k in factors:
        axes[k], axes[n + k] = axes[n + k], axes[k]
    side = m.shape[0]
    return np.ascontiguousarray(np.asarray(m).reshape(dims + dims).transpose(axes)).reshape(side, side)


def check_density_matrix(rho: np.ndarray, tol: float = STATE_TOL) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if not is_hermitian(rho, tol):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density matrix has trace {np.trace(rho).real:.3g}, expected 1")
    lo = np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]
    if lo < -tol:
        raise ValueError(f"density matrix has negative eigenvalue {lo:.3g}")


def state_contract(m: np.ndarray, dims: Sequence[int], factor: int, nu: np.ndarray) -> np.ndarray:
    """Contract one factor against a state: ``b_k -> Tr(nu b_k)`` on elementary tensors."""
    dims = tuple(int(d) for d in dims)
    _check_square(m, dims)
    n = len(dims)
    if not 0 <= factor < n:
        raise IndexError(f"factor {factor} out of range for {n} factors")
    nu = np.asarray(nu)
    if nu.shape != (dims[factor], dims[factor]):
        raise ValueError(f"state of shape {nu.shape} does not fit factor of dim {dims[factor]}")
    check_density_matrix(nu)
    letters = string.ascii_letters
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    keep = [k for k in range(n) if k != factor]
    out = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    sub = "..." + "".join(row) + "".join(col) + "," + col[factor] + row[factor] + "->..." + out
    m = np.asarray(m)
    lead = m.shape[:-2]
    t = np.einsum(sub, m.reshape(lead + dims + dims), nu)
    side = int(np.prod([dims[k] for k in keep], dtype=np.int64)) if keep else 1
    return t.reshape(lead + (side, side))


def hermitian_eig(m: np.ndarray, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and unitary eigenvectors of a Hermitian matrix."""
    m = np.asarray(m)
    if not is_hermitian(m, tol * max(1.0, float(np.max(np.abs(m), initial=0.0)))):
        raise ValueError("matrix is not Hermitian")
    return np.linalg.eigh((m + m.conj().T) / 2)


def trace_norm(m: np.ndarray) -> float:
    w, _ = hermitian_eig(m)
    return float(np.sum(np.abs(w)))
