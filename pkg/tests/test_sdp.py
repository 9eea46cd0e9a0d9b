import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from qw1 import sdp
from qw1.sdp import Block, ConicProgram


def brute_scaling(bl, w):
    n = bl.dim
    out = np.zeros((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1
        out[:, i] = sdp.mat_to_block(bl, w @ sdp.block_to_mat(bl, e) @ w)
    return out


@pytest.mark.parametrize("kind", ["hermitian", "symmetric"])
@pytest.mark.parametrize("d", [1, 2, 3, 6])
def test_scaling_operator_matches_brute_force(kind, d):
    rng = np.random.default_rng(d)
    g = rng.normal(size=(d, d)) + (1j * rng.normal(size=(d, d)) if kind == "hermitian" else 0)
    w = g @ g.conj().T
    bl = Block(kind, d)
    assert np.allclose(sdp.scaling_operator(bl, w), brute_scaling(bl, w), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(d=st.integers(1, 6), seed=st.integers(0, 2**16))
def test_hvec_is_an_isometry(d, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    b = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    a, b = a + a.conj().T, b + b.conj().T
    assert np.allclose(sdp.hmat(sdp.hvec(a), d), a)
    assert np.isclose(sdp.hvec(a) @ sdp.hvec(b), np.trace(a @ b).real)
    s, t = a.real, b.real
    assert np.isclose(sdp.svec(s) @ sdp.svec(t), np.trace(s @ t))


def random_program(rng, sizes=(3, 4), n_nonneg=3, m=8, kind="hermitian"):
    """Strictly feasible primal and dual by construction, hence bounded with zero gap."""
    blocks = [Block(kind, d) for d in sizes] + [Block("nonneg", n_nonneg)]
    nvar = sum(b.dim for b in blocks)
    A = rng.normal(size=(m, nvar))

    def interior():
        parts = []
        for bl in blocks:
            if bl.is_matrix:
                g = rng.normal(size=(bl.size, bl.size))
                if bl.kind == "hermitian":
                    g = g + 1j * rng.normal(size=(bl.size, bl.size))
                parts.append(sdp.mat_to_block(bl, g @ g.conj().T + np.eye(bl.size)))
            else:
                parts.append(rng.random(bl.size) + 0.5)
        return np.concatenate(parts)

    x0, s0 = interior(), interior()
    y0 = rng.normal(size=m)
    return ConicProgram(blocks, A.T @ y0 + s0, sp.csr_matrix(A), A @ x0)


def in_cone(p, v, tol):
    for bl, part in zip(p.blocks, p.split(v)):
        if bl.is_matrix:
            if np.linalg.eigvalsh(sdp.block_to_mat(bl, part))[0] < -tol:
                return False
        elif part.min() < -tol:
            return False
    return True


def test_tiny_lp():
    # min x1 + 2 x2  s.t. x1 + x2 = 5, x >= 0  ->  5
    p = ConicProgram([Block("nonneg", 2)], [1.0, 2.0], sp.csr_matrix([[1.0, 1.0]]), [5.0])
    sol = sdp.solve(p)
    assert sol.status == sdp.OPTIMAL
    assert sol.primal_objective == pytest.approx(5, abs=1e-7)
    assert np.allclose(sol.x, [5, 0], atol=1e-6)


def test_smallest_eigenvalue_program():
    # min <C, X> s.t. Tr X = 1, X >= 0 is the smallest eigenvalue of C
    rng = np.random.default_rng(0)
    c = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    c = c + c.conj().T
    bl = Block("hermitian", 4)
    p = ConicProgram([bl], sdp.hvec(c), sp.csr_matrix(sdp.hvec(np.eye(4))[None, :]), [1.0])
    sol = sdp.solve(p)
    assert sol.status == sdp.OPTIMAL
    assert sol.primal_objective == pytest.approx(np.linalg.eigvalsh(c)[0], abs=1e-7)


@pytest.mark.parametrize("sizes", [(2, 3), (4, 8), (16,)])
def test_random_feasible_programs_converge(sizes):
    rng = np.random.default_rng(sum(sizes))
    p = random_program(rng, sizes=sizes, m=2 * sum(sizes))
    sol = sdp.solve(p, tol=1e-8, max_iter=100)
    assert sol.status == sdp.OPTIMAL
    assert sol.relative_gap <= 1e-7
    # independent residual checks
    assert np.linalg.norm(p.A @ sol.x - p.b) <= 1e-7 * (1 + np.linalg.norm(p.b))
    assert np.linalg.norm(p.A.T @ sol.y + sol.s - p.c) <= 1e-7 * (1 + np.linalg.norm(p.c))
    assert in_cone(p, sol.x, 1e-9) and in_cone(p, sol.s, 1e-9)
    # weak duality with fresh arithmetic
    assert p.c @ sol.x >= p.b @ sol.y - 1e-7


def test_solver_is_deterministic():
    p = random_program(np.random.default_rng(5))
    a, b = sdp.solve(p), sdp.solve(p)
    assert np.array_equal(a.x, b.x) and a.iterations == b.iterations


def test_embedding_gives_same_objective():
    p = random_program(np.random.default_rng(9), sizes=(3, 5))
    native = sdp.solve(p)
    emb = sdp.embed_hermitian(p)
    sol_e = sdp.solve(emb)
    assert sol_e.status == sdp.OPTIMAL
    x_back = sdp.extract_hermitian(p, emb, sol_e.x)
    # Hermitian arithmetic: sum of Tr(C_b X_b) over blocks
    direct = 0.0
    for bl, cb, xb in zip(p.blocks, p.split(p.c), p.split(x_back)):
        if bl.is_matrix:
            direct += np.trace(sdp.block_to_mat(bl, cb) @ sdp.block_to_mat(bl, xb)).real
        else:
            direct += cb @ xb
    assert abs(sol_e.primal_objective / 2 - direct) <= 1e-9 * (1 + abs(direct))
    # both routes solve the same program
    assert abs(direct - native.primal_objective) <= 1e-7 * (1 + abs(direct))


def test_presolve_rank_and_consistency():
    rng = np.random.default_rng(1)
    base = rng.normal(size=(5, 12))
    A = np.vstack([base, base[0] + 2 * base[3], base[1] - base[2]])
    x0 = rng.random(12)
    p = ConicProgram([Block("nonneg", 12)], np.ones(12), sp.csr_matrix(A), A @ x0)
    red, ok = sdp.presolve(p)
    assert ok
    assert red.rank == np.linalg.matrix_rank(A) == 5
    assert len(red.removed_rows) == 2
    assert np.linalg.matrix_rank(red.A.toarray()) == 5

    bad_b = A @ x0
    bad_b[-1] += 1.0
    _, ok = sdp.presolve(ConicProgram([Block("nonneg", 12)], np.ones(12), sp.csr_matrix(A), bad_b))
    assert not ok


def test_inconsistent_equalities_report_infeasible():
    A = sp.csr_matrix([[1.0, 1.0], [2.0, 2.0]])
    p = ConicProgram([Block("nonneg", 2)], [1.0, 1.0], A, [1.0, 3.0])
    assert sdp.solve(p).status == sdp.INFEASIBLE


def test_dual_multipliers_map_back_to_all_rows():
    rng = np.random.default_rng(2)
    p = random_program(rng, m=6)
    A = sp.vstack([p.A, p.A[:1]]).tocsr()
    q = ConicProgram(p.blocks, p.c, A, np.concatenate([p.b, p.b[:1]]))
    sol = sdp.solve(q)
    assert sol.y.shape == (7,)
    assert np.linalg.norm(A.T @ sol.y + sol.s - q.c) <= 1e-7 * (1 + np.linalg.norm(q.c))


def test_program_shape_validation():
    with pytest.raises(ValueError):
        ConicProgram([Block("nonneg", 2)], [1.0], sp.csr_matrix((1, 2)), [0.0])
    with pytest.raises(ValueError):
        Block("psd", 2)


def test_weak_duality_along_the_path():
    p = random_program(np.random.default_rng(4), sizes=(4, 4), m=10)
    sol = sdp.solve(p)
    feasible = [h for h in sol.history if h["pres"] <= 1e-8 and h["dres"] <= 1e-8]
    assert feasible
    for h in feasible:
        assert h["pobj"] >= h["dobj"] - 1e-9 * (1 + abs(h["pobj"]))
