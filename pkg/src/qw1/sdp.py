"""Primal-dual interior-point solver for small dense semidefinite programs.

Standard form::

    minimize    <c, x>            maximize    <b, y>
    subject to  A x = b           subject to  A^T y + s = c
                x in K                        s in K

``K`` is a product of blocks: Hermitian PSD matrices, real symmetric PSD
matrices and nonnegative orthants. Matrix blocks are vectorized with an
orthonormal real basis (``hvec``/``svec``), so ``<u, v>`` is the real trace
inner product and every functional is real-valued.

The iteration is Nesterov-Todd scaled path following with Mehrotra's
predictor-corrector and a dense Cholesky factorization of the normal
equations. ``A`` may be sparse; the Schur complement is always dense.
"""
from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

log = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)

OPTIMAL = "optimal"
MAX_ITERATIONS = "max_iterations"
NUMERICAL_FAILURE = "numerical_failure"
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class Block:
    kind: str  # "hermitian", "symmetric" or "nonneg"
    size: int

    def __post_init__(self):
        if self.kind not in ("hermitian", "symmetric", "nonneg"):
            raise ValueError(f"unknown block kind {self.kind!r}")
        if self.size < 1:
            raise ValueError("block size must be >= 1")

    @property
    def dim(self) -> int:
        """Number of real coordinates."""
        if self.kind == "hermitian":
            return self.size * self.size
        if self.kind == "symmetric":
            return self.size * (self.size + 1) // 2
        return self.size

    @property
    def degree(self) -> int:
        return self.size

    @property
    def is_matrix(self) -> bool:
        return self.kind != "nonneg"


# --- vectorization -------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _triu(d: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(d, 1)


def hvec(x: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix: diagonal, sqrt2*Re(upper), sqrt2*Im(upper)."""
    d = x.shape[-1]
    iu, ju = _triu(d)
    diag = np.real(np.diagonal(x, axis1=-2, axis2=-1))
    up = x[..., iu, ju]
    return np.concatenate([diag, SQRT2 * up.real, SQRT2 * up.imag], axis=-1)


def hmat(v: np.ndarray, d: int) -> np.ndarray:
    iu, ju = _triu(d)
    k = len(iu)
    x = np.zeros(v.shape[:-1] + (d, d), dtype=complex)
    idx = np.arange(d)
    x[..., idx, idx] = v[..., :d]
    up = (v[..., d : d + k] + 1j * v[..., d + k :]) / SQRT2
    x[..., iu, ju] = up
    x[..., ju, iu] = up.conj()
    return x


def svec(x: np.ndarray) -> np.ndarray:
    d = x.shape[-1]
    iu, ju = _triu(d)
    return np.concatenate([np.diagonal(x, axis1=-2, axis2=-1), SQRT2 * x[..., iu, ju]], axis=-1)


def smat(v: np.ndarray, d: int) -> np.ndarray:
    iu, ju = _triu(d)
    x = np.zeros(v.shape[:-1] + (d, d))
    idx = np.arange(d)
    x[..., idx, idx] = v[..., :d]
    x[..., iu, ju] = v[..., d:] / SQRT2
    x[..., ju, iu] = v[..., d:] / SQRT2
    return x


def block_to_mat(block: Block, v: np.ndarray):
    if block.kind == "hermitian":
        return hmat(v, block.size)
    if block.kind == "symmetric":
        return smat(v, block.size)
    return np.asarray(v, dtype=float)


def mat_to_block(block: Block, x) -> np.ndarray:
    if block.kind == "hermitian":
        return hvec(x)
    if block.kind == "symmetric":
        return svec(np.real(x))
    return np.asarray(x, dtype=float)


def scaling_operator(block: Block, w: np.ndarray) -> np.ndarray:
    """Matrix of ``D -> W D W`` in the block's orthonormal coordinates.

    Basis elements are ``E_kk``, ``(E_kl + E_lk)/sqrt2`` and (Hermitian only)
    ``i(E_kl - E_lk)/sqrt2`` for ``k < l``. With ``(a, b)`` and ``(k, l)``
    running over pairs ``a <= b``, ``k <= l``:

        t1[(a,b),(k,l)] = (W E_kl W)_ab = W_ak W_lb
        t2[(a,b),(k,l)] = (W E_lk W)_ab = W_al W_kb
    """
    d = block.size
    iu, ju = _triu(d)
    diag = np.arange(d)
    a = np.concatenate([diag, iu])
    b = np.concatenate([diag, ju])
    u = iu.size
    # W is Hermitian, so the transposed gathers are conjugates of plain ones
    wc = w.conj()
    t1 = w.take(a, axis=0).take(a, axis=1)
    t1 *= wc.take(b, axis=0).take(b, axis=1)
    t2 = w.take(a, axis=0).take(ju, axis=1)
    t2 *= wc.take(b, axis=0).take(iu, axis=1)
    up = t1[:, d:]
    if block.kind == "symmetric":
        out = np.empty((d + u, d + u))
        out[:, :d] = t1[:, :d].real
        np.add(up.real, t2.real, out=out[:, d:])
        out[:d, d:] /= SQRT2
        out[d:, :d] *= SQRT2
        return out
    n = d + 2 * u
    out = np.empty((n, n))
    # columns: diagonal basis elements
    out[:d, :d] = t1[:d, :d].real
    np.multiply(t1[d:, :d].real, SQRT2, out=out[d : d + u, :d])
    np.multiply(t1[d:, :d].imag, SQRT2, out=out[d + u :, :d])
    # columns: symmetric off-diagonal elements, (t1 + t2) / sqrt2 in rows' coordinates
    np.add(up[:d].real, t2[:d].real, out=out[:d, d : d + u])
    out[:d, d : d + u] /= SQRT2
    np.add(up[d:].real, t2[d:].real, out=out[d : d + u, d : d + u])
    np.add(up[d:].imag, t2[d:].imag, out=out[d + u :, d : d + u])
    # columns: antisymmetric elements, i (t1 - t2) / sqrt2
    np.subtract(t2[:d].imag, up[:d].imag, out=out[:d, d + u :])
    out[:d, d + u :] /= SQRT2
    np.subtract(t2[d:].imag, up[d:].imag, out=out[d : d + u, d + u :])
    np.subtract(up[d:].real, t2[d:].real, out=out[d + u :, d + u :])
    return out


# --- program / solution ---------------------------------------------------------


@dataclass
class ConicProgram:
    blocks: list[Block]
    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    removed_rows: list[int] = field(default_factory=list)
    rank: int | None = None

    def __post_init__(self):
        self.blocks = list(self.blocks)
        nvar = sum(bl.dim for bl in self.blocks)
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.A = sp.csr_matrix(self.A, dtype=float)
        if self.c.shape != (nvar,):
            raise ValueError(f"objective has {self.c.size} entries, expected {nvar}")
        if self.A.shape != (self.b.size, nvar):
            raise ValueError(f"constraint matrix of shape {self.A.shape}, expected ({self.b.size}, {nvar})")

    @property
    def offsets(self) -> list[int]:
        out = [0]
        for bl in self.blocks:
            out.append(out[-1] + bl.dim)
        return out

    @property
    def nvar(self) -> int:
        return self.offsets[-1]

    def split(self, v: np.ndarray) -> list[np.ndarray]:
        off = self.offsets
        return [v[off[i] : off[i + 1]] for i in range(len(self.blocks))]

    def unpack(self, v: np.ndarray) -> list:
        """Block values as matrices (matrix blocks) or vectors (nonneg blocks)."""
        return [block_to_mat(bl, part) for bl, part in zip(self.blocks, self.split(v))]

    def pack(self, values: Sequence) -> np.ndarray:
        return np.concatenate([mat_to_block(bl, x) for bl, x in zip(self.blocks, values)])


@dataclass
class ConicSolution:
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    primal_objective: float
    dual_objective: float
    gap: float
    primal_residual: float
    dual_residual: float
    status: str
    iterations: int
    message: str = ""
    history: list[dict] = field(default_factory=list, repr=False)

    @property
    def relative_gap(self) -> float:
        return self.gap / (1.0 + abs(self.primal_objective))


# --- presolve ---------------------------------------------------------------------


def presolve(p: ConicProgram, tol: float = 1e-10) -> tuple[ConicProgram, bool]:
    """Drop linearly dependent equality rows.

    Returns the reduced program (with ``removed_rows`` and ``rank`` recorded)
    and whether the dropped rows are consistent with the kept ones.
    """
    m = p.b.size
    if m == 0:
        return ConicProgram(p.blocks, p.c, p.A, p.b, [], 0), True
    gram = (p.A @ p.A.T).toarray()
    scale = max(float(np.max(np.diag(gram))), 1e-300)
    chol, piv, rank, _ = sla.lapack.dpstrf(gram, lower=1, tol=tol * scale)
    piv = piv - 1
    keep = np.sort(piv[:rank])
    drop = np.sort(piv[rank:])
    consistent = True
    if drop.size:
        g_kk = gram[np.ix_(keep, keep)]
        g_kd = gram[np.ix_(keep, drop)]
        coef = sla.cho_solve(sla.cho_factor(g_kk, lower=True), g_kd)
        pred = coef.T @ p.b[keep]
        consistent = bool(np.max(np.abs(pred - p.b[drop])) <= 1e-8 * (1.0 + np.linalg.norm(p.b)))
    reduced = ConicProgram(p.blocks, p.c, p.A[keep], p.b[keep], [int(i) for i in drop], int(rank))
    return reduced, consistent


# --- solver -------------------------------------------------------------------------


def _identity(block: Block, scale: float) -> np.ndarray:
    if block.is_matrix:
        return mat_to_block(block, scale * np.eye(block.size))
    return np.full(block.size, scale)


def _nt_scaling(block: Block, xv: np.ndarray, sv: np.ndarray):
    """Returns (G, G^{-1}, lambda) with G^dag S G = G^{-1} X G^{-dag} = diag(lambda)."""
    if not block.is_matrix:
        g = np.sqrt(xv / sv)
        return g, 1.0 / g, np.sqrt(xv * sv)
    x = block_to_mat(block, xv)
    s = block_to_mat(block, sv)
    lx = np.linalg.cholesky(x)
    ls = np.linalg.cholesky(s)
    u, lam, vh = np.linalg.svd(ls.conj().T @ lx)
    g = lx @ vh.conj().T / np.sqrt(lam)
    ginv = (u.conj().T @ ls.conj().T) / np.sqrt(lam)[:, None]
    return g, ginv, lam


def _max_step(block: Block, lam: np.ndarray, dt: np.ndarray) -> float:
    """Largest alpha with lambda + alpha * dt in the cone (dt in scaled coordinates)."""
    if not block.is_matrix:
        ratio = dt / lam
        lo = float(ratio.min(initial=0.0))
    else:
        isq = 1.0 / np.sqrt(lam)
        lo = float(np.linalg.eigvalsh(isq[:, None] * dt * isq[None, :])[0])
    return math.inf if lo >= 0 else -1.0 / lo


def _jordan(a, b):
    if a.ndim == 1:
        return a * b
    return (a @ b + b @ a) / 2


def _lyap_solve(lam: np.ndarray, r):
    """Solve lambda o T = r for T (lambda diagonal)."""
    if r.ndim == 1:
        return r / lam
    return 2.0 * r / (lam[:, None] + lam[None, :])


def _index(idx: np.ndarray):
    """A slice when ``idx`` is a contiguous increasing range (cheaper views), else ``idx``."""
    if idx.size and idx[-1] - idx[0] + 1 == idx.size and np.all(np.diff(idx) == 1):
        return slice(int(idx[0]), int(idx[-1]) + 1)
    return idx


@dataclass
class _RowParts:
    """Rows of one block's constraint matrix, split into single-entry rows and the rest."""

    sel_rows: object
    sel_cols: object
    sel_vals: np.ndarray
    rest_rows: object
    rest: sp.csr_matrix
    sel_is_identity: bool


def _split_rows(ab: sp.csr_matrix) -> _RowParts:
    nnz = np.diff(ab.indptr)
    sel = np.flatnonzero(nnz == 1)
    rest = np.flatnonzero(nnz >= 2)
    cols = ab.indices[ab.indptr[sel]]
    vals = ab.data[ab.indptr[sel]]
    ident = bool(np.all(vals == vals[0])) if vals.size else False
    return _RowParts(_index(sel), _index(cols), vals, _index(rest), ab[rest], ident)


def _add_schur(schur: np.ndarray, parts: _RowParts, k: np.ndarray) -> None:
    """schur += A_b K A_b^T, exploiting rows of A_b with a single nonzero."""
    sr, sc, v, rr = parts.sel_rows, parts.sel_cols, parts.sel_vals, parts.rest_rows
    n_sel = v.size
    if n_sel:
        ksel = k[sc, :][:, sc] if not isinstance(sc, slice) else k[sc, sc]
        if parts.sel_is_identity:
            if v[0] * v[0] != 1.0:
                ksel = ksel * (v[0] * v[0])
        else:
            ksel = ksel * np.outer(v, v)
        if isinstance(sr, slice):
            schur[sr, sr] += ksel
        else:
            schur[np.ix_(sr, sr)] += ksel
    if parts.rest.shape[0]:
        ka = np.asarray(parts.rest @ k)
        block = np.asarray(parts.rest @ ka.T)
        if isinstance(rr, slice):
            schur[rr, rr] += block
        else:
            schur[np.ix_(rr, rr)] += block
        if n_sel:
            cross = ka[:, sc] * v[None, :]
            if isinstance(rr, slice) and isinstance(sr, slice):
                schur[rr, sr] += cross
                schur[sr, rr] += cross.T
            else:
                rri = np.arange(rr.start, rr.stop) if isinstance(rr, slice) else rr
                sri = np.arange(sr.start, sr.stop) if isinstance(sr, slice) else sr
                schur[np.ix_(rri, sri)] += cross
                schur[np.ix_(sri, rri)] += cross.T


def solve(
    p: ConicProgram,
    tol: float = 1e-8,
    max_iter: int = 100,
    x0: np.ndarray | None = None,
    y0: np.ndarray | None = None,
    s0: np.ndarray | None = None,
    step: float = 0.98,
    do_presolve: bool = True,
    verbose: bool = False,
) -> ConicSolution:
    """Solve ``p``; see the module docstring for the standard form.

    ``x0`` may supply a strictly interior primal point; otherwise a scaled
    identity is used. The returned ``y`` always has one entry per row of the
    *original* ``A`` (dropped dependent rows get multiplier 0).
    """
    m_orig = p.b.size
    kept = np.arange(m_orig)
    if do_presolve and m_orig:
        q, consistent = presolve(p)
        if not consistent:
            z = np.zeros(p.nvar)
            return ConicSolution(z, np.zeros(m_orig), z.copy(), math.nan, math.nan, math.inf,
                                 math.inf, math.inf, INFEASIBLE, 0, "inconsistent equality constraints")
        kept = np.setdiff1d(np.arange(m_orig), q.removed_rows)
        p_red = q
    else:
        p_red = p
    A, b, c = p_red.A, p_red.b, p.c
    AT = A.T.tocsr()
    blocks = p.blocks
    off = p.offsets
    sl = [slice(off[i], off[i + 1]) for i in range(len(blocks))]
    row_parts = [_split_rows(A[:, s_].tocsr()) for s_ in sl]
    nu = sum(bl.degree for bl in blocks)
    norm_b, norm_c = np.linalg.norm(b), np.linalg.norm(c)

    # SDPT3-style starting scale
    row_norms = np.sqrt(np.asarray(A.multiply(A).sum(axis=1)).ravel()) if b.size else np.zeros(0)
    xi = max(10.0, math.sqrt(max(bl.size for bl in blocks)),
             float(np.max((1.0 + np.abs(b)) / (1.0 + row_norms), initial=0.0)) * max(bl.size for bl in blocks) ** 0.5)
    eta = max(10.0, math.sqrt(max(bl.size for bl in blocks)), norm_c, float(row_norms.max(initial=0.0)))
    x = np.concatenate([_identity(bl, xi) for bl in blocks]) if x0 is None else np.array(x0, dtype=float)
    s = np.concatenate([_identity(bl, eta) for bl in blocks]) if s0 is None else np.array(s0, dtype=float)
    y = np.zeros(b.size) if y0 is None else np.asarray(y0, dtype=float)[kept].copy()

    history: list[dict] = []
    status, message = MAX_ITERATIONS, ""
    it = 0
    best_gap_window: list[float] = []
    for it in range(max_iter + 1):
        rp = b - A @ x
        rd = c - AT @ y - s
        pobj, dobj = float(c @ x), float(b @ y)
        mu = float(x @ s) / nu
        pres = float(np.linalg.norm(rp)) / (1.0 + norm_b)
        dres = float(np.linalg.norm(rd)) / (1.0 + norm_c)
        gap = max(abs(pobj - dobj), float(x @ s))
        rel = gap / (1.0 + abs(pobj))
        history.append(dict(it=it, pobj=pobj, dobj=dobj, pres=pres, dres=dres, rel_gap=rel, mu=mu))
        if verbose:
            log.info("it %3d pobj %+.9e dobj %+.9e pres %.1e dres %.1e gap %.1e", it, pobj, dobj, pres, dres, rel)
        if pres <= tol and dres <= tol and rel <= tol:
            status = OPTIMAL
            break
        if it == max_iter:
            break
        best_gap_window.append(rel + pres + dres)
        if len(best_gap_window) > 10:
            best_gap_window.pop(0)
            if best_gap_window[-1] > 0.99 * best_gap_window[0]:
                status, message = NUMERICAL_FAILURE, "stalled: less than 1% progress in 10 iterations"
                break

        try:
            scal = [_nt_scaling(bl, x[s_], s[s_]) for bl, s_ in zip(blocks, sl)]
        except np.linalg.LinAlgError:
            status, message = NUMERICAL_FAILURE, "iterate left the cone"
            break
        wmats = []
        schur = np.zeros((b.size, b.size))
        for bl, parts, (g, _, _) in zip(blocks, row_parts, scal):
            if bl.is_matrix:
                w = g @ g.conj().T
                w = (w + w.conj().T) / 2
                wmats.append(w)
                _add_schur(schur, parts, scaling_operator(bl, w))
            else:
                wmats.append(g * g)
                _add_schur(schur, parts, np.diag(g * g))
        schur += schur.T
        schur *= 0.5
        factor = None
        diag_max = max(1.0, float(np.max(np.diag(schur), initial=0.0)))
        for reg in (0.0, 1e-14, 1e-12, 1e-10):
            try:
                trial = schur.copy() if reg else schur
                if reg:
                    trial[np.diag_indices_from(trial)] += reg * diag_max
                factor = sla.cho_factor(trial, lower=True, check_finite=False,
                                        overwrite_a=reg > 0)
                break
            except np.linalg.LinAlgError:
                continue
        if factor is None:
            status, message = NUMERICAL_FAILURE, "Schur complement not positive definite"
            break

        def apply_w(i, v):
            bl = blocks[i]
            if bl.is_matrix:
                mat = block_to_mat(bl, v)
                return mat_to_block(bl, wmats[i] @ mat @ wmats[i])
            return wmats[i] * v

        w_rd = np.concatenate([apply_w(i, rd[s_]) for i, s_ in enumerate(sl)])

        def direction(targets):
            # targets: scaled complementarity right-hand sides T_b with dX~ + dS~ = T_b
            gtg = []
            for bl, (g, _, _), t in zip(blocks, scal, targets):
                if bl.is_matrix:
                    gtg.append(mat_to_block(bl, g @ t @ g.conj().T))
                else:
                    gtg.append(g * t)
            gtg = np.concatenate(gtg)
            rhs = rp - A @ gtg + A @ w_rd
            dy = sla.cho_solve(factor, rhs, check_finite=False)
            ds = rd - AT @ dy
            dx = gtg - np.concatenate([apply_w(i, ds[s_]) for i, s_ in enumerate(sl)])
            # one step of iterative refinement on the primal equation
            res = rp - A @ dx
            if np.linalg.norm(res) > 1e-14 * (1 + norm_b):
                corr = sla.cho_solve(factor, res, check_finite=False)
                dy = dy + corr
                dsc = -(AT @ corr)
                ds = ds + dsc
                dx = dx - np.concatenate([apply_w(i, dsc[s_]) for i, s_ in enumerate(sl)])
            return dx, dy, ds

        def scaled(dx, ds):
            out = []
            for bl, (g, ginv, _), s_ in zip(blocks, scal, sl):
                if bl.is_matrix:
                    dxm = block_to_mat(bl, dx[s_])
                    dsm = block_to_mat(bl, ds[s_])
                    out.append((ginv @ dxm @ ginv.conj().T, g.conj().T @ dsm @ g))
                else:
                    out.append((dx[s_] / g, ds[s_] * g))
            return out

        def steps(sc):
            ap = ad = math.inf
            for bl, (_, _, lam), (dxt, dst) in zip(blocks, scal, sc):
                ap = min(ap, _max_step(bl, lam, dxt))
                ad = min(ad, _max_step(bl, lam, dst))
            return ap, ad

        lams = [lam for _, _, lam in scal]
        # predictor
        t_aff = [(-np.diag(lam) if bl.is_matrix else -lam) for bl, lam in zip(blocks, lams)]
        dx_a, dy_a, ds_a = direction(t_aff)
        sc_a = scaled(dx_a, ds_a)
        ap, ad = steps(sc_a)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = float((x + ap * dx_a) @ (s + ad * ds_a)) / nu
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3 if mu > 0 else 0.0
        # corrector
        t_cor = []
        for bl, lam, (dxt, dst) in zip(blocks, lams, sc_a):
            if bl.is_matrix:
                r = sigma * mu * np.eye(bl.size) - np.diag(lam * lam) - _jordan(dxt, dst)
            else:
                r = sigma * mu - lam * lam - dxt * dst
            t_cor.append(_lyap_solve(lam, r))
        dx, dy, ds = direction(t_cor)
        ap, ad = steps(scaled(dx, ds))
        ap, ad = min(1.0, step * ap), min(1.0, step * ad)
        x = x + ap * dx
        y = y + ad * dy
        s = s + ad * ds
        if ap < 1e-10 and ad < 1e-10:
            status, message = NUMERICAL_FAILURE, "step length collapsed"
            break

    y_full = np.zeros(m_orig)
    y_full[kept] = y
    rp_full = p.b - p.A @ x
    rd = c - p.A.T @ y_full - s
    pobj, dobj = float(c @ x), float(p.b @ y_full)
    return ConicSolution(
        x=x, y=y_full, s=s,
        primal_objective=pobj, dual_objective=dobj,
        gap=max(abs(pobj - dobj), float(x @ s)),
        primal_residual=float(np.linalg.norm(rp_full)) / (1.0 + np.linalg.norm(p.b)),
        dual_residual=float(np.linalg.norm(rd)) / (1.0 + norm_c),
        status=status, iterations=it, message=message, history=history,
    )


# --- real symmetric embedding of Hermitian blocks -----------------------------


def _embed_matrix(h: np.ndarray) -> np.ndarray:
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def embed_hermitian(p: ConicProgram) -> ConicProgram:
    """Equivalent program with every Hermitian block of side d replaced by a symmetric block of side 2d.

    ``X = P + iQ`` maps to ``[[P, -Q], [Q, P]]``; all functionals are
    embedded the same way, which doubles every inner product, so the
    right-hand side ``b`` and nonnegative-block coefficients are doubled to
    match. The optimal value of the embedded program is twice the original.
    """
    new_blocks, c_parts, a_parts = [], [], []
    a_csc = p.A.tocsc()
    for bl, s_ in zip(p.blocks, [slice(o, o2) for o, o2 in zip(p.offsets[:-1], p.offsets[1:])]):
        if bl.kind != "hermitian":
            new_blocks.append(bl)
            c_parts.append(2 * p.c[s_])
            a_parts.append(2 * a_csc[:, s_])
            continue
        nb = Block("symmetric", 2 * bl.size)
        new_blocks.append(nb)
        c_parts.append(svec(_embed_matrix(hmat(p.c[s_], bl.size))))
        sub = a_csc[:, s_].toarray()
        rows = svec(_embed_matrix_stack(hmat(sub, bl.size)))
        a_parts.append(sp.csc_matrix(rows))
    return ConicProgram(new_blocks, np.concatenate(c_parts), sp.hstack(a_parts).tocsr(), 2 * p.b)


def _embed_matrix_stack(h: np.ndarray) -> np.ndarray:
    re, im = h.real, h.imag
    top = np.concatenate([re, -im], axis=-1)
    bot = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bot], axis=-2)


def extract_hermitian(p: ConicProgram, embedded: ConicProgram, x_emb: np.ndarray) -> np.ndarray:
    """Map an embedded primal point back to the coordinates of ``p``."""
    parts = []
    for bl, part in zip(p.blocks, embedded.split(x_emb)):
        if bl.kind != "hermitian":
            parts.append(part)
            continue
        d = bl.size
        big = smat(part, 2 * d)
        re = (big[:d, :d] + big[d:, d:]) / 2
        im = (big[d:, :d] - big[:d, d:]) / 2
        parts.append(hvec(re + 1j * im))
    return np.concatenate(parts)
