import io
import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from cohstate import algebra as A
from cohstate import coherent as C
from cohstate import fock as F
from cohstate.vibron import build_operators, l_block
from strategies import conserving_polys, frames, occupancies


def test_basis_sizes():
    assert len(F.enumerate_basis(3, 2)) == 6
    assert len(F.enumerate_basis(3, 100)) == 5151


def test_basis_ordering_and_totals():
    basis = F.enumerate_basis(3, 2)
    assert basis.states == ((2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2))
    assert all(sum(s) == 2 for s in basis)


@pytest.mark.parametrize("N", [0, 1, 4, 7])
def test_l_blocks_partition_the_space(N):
    sizes = [len(l_block(N, l)) for l in range(-N, N + 1)]
    assert sum(sizes) == math.comb(N + 2, 2)
    for l in range(-N, N + 1):
        assert all(s[1] - s[2] == l for s in l_block(N, l))


def test_number_operator_matrix():
    basis = F.enumerate_basis(3, 4)
    mat = F.matrix_of(A.number_operator(3), basis).toarray()
    np.testing.assert_allclose(mat, 4 * np.eye(len(basis)))


def test_angular_momentum_diagonal():
    basis = F.enumerate_basis(3, 3)
    mat = F.matrix_of(build_operators().l, basis).toarray()
    np.testing.assert_allclose(mat, np.diag([s[1] - s[2] for s in basis]))


def test_casimir_n2_eigenvalues():
    basis = F.enumerate_basis(3, 2)
    w, _ = F.eigensolve(F.matrix_of(build_operators().w2, basis))
    np.testing.assert_allclose(w, [0, 6, 6, 6, 6, 6], atol=1e-12)


def test_hamiltonian_n2_eigenvalues():
    basis = F.enumerate_basis(3, 2)
    w, _ = F.eigensolve(F.matrix_of(build_operators().hamiltonian, basis))
    np.testing.assert_allclose(w, [-6, -6, -6, -6, -6, 0], atol=1e-12)


def test_matrix_leaving_block_rejected():
    with pytest.raises(ValueError, match="leaves the basis"):
        F.matrix_of(build_operators().d_plus, l_block(3, 0))


def test_eigensolve_diagonal():
    w, v = F.eigensolve(np.diag([3.0, -1.0, 2.0]))
    np.testing.assert_allclose(w, [-1, 2, 3])


def test_eigensolve_rejects_non_hermitian():
    with pytest.raises(ValueError, match="not Hermitian"):
        F.eigensolve(np.array([[0, 1], [0, 0]]))


def test_eigensolve_residuals():
    basis = F.enumerate_basis(3, 10)
    h = F.matrix_of(build_operators().hamiltonian, basis)
    w, v = F.eigensolve(h)
    dense = h.toarray()
    scale = np.linalg.norm(dense, 2)
    for k in range(len(w)):
        assert np.linalg.norm(dense @ v[:, k] - w[k] * v[:, k]) <= 1e-8 * scale


def test_coherent_single_boson(rng):
    f = C.random_frame(rng, 1, 3)
    vec = F.coherent_vector(f, (1,), F.enumerate_basis(3, 1))
    # basis order (1,0,0), (0,1,0), (0,0,1)
    np.testing.assert_allclose(vec.amplitudes, f.alpha[0])


def test_coherent_orthogonal_occupancies(rng):
    f = C.random_frame(rng, 2, 3)
    basis = F.enumerate_basis(3, 1)
    a = F.coherent_vector(f, (1, 0), basis)
    b = F.coherent_vector(f, (0, 1), basis)
    assert abs(a.overlap(b)) < 1e-14


def test_coherent_total_mismatch(rng):
    f = C.random_frame(rng, 2, 3)
    with pytest.raises(ValueError, match="does not match"):
        F.coherent_vector(f, (1, 1), F.enumerate_basis(3, 3))


def test_oracle_identity(rng):
    f = C.random_frame(rng, 2, 3)
    one = A.OperatorPoly.identity(3)
    assert abs(F.me_oracle(f, (2, 1), (2, 1), one) - 1) < 1e-12
    assert abs(F.me_oracle(f, (1, 2), (2, 1), one)) < 1e-12


def test_oracle_condensate_one_body(rng):
    f = C.random_frame(rng, 1, 3)
    a = f.alpha[0]
    p = A.bilinear(3, 2, 3)
    assert F.me_oracle(f, (5,), (5,), p) == pytest.approx(5 * a[1].conjugate() * a[2], abs=1e-12)


def test_oracle_guard(rng):
    f = C.random_frame(rng, 1, 3)
    with pytest.raises(ValueError, match="exceeds guard"):
        F.me_oracle(f, (500,), (500,), A.number_operator(3))


def test_dump_matrix_format():
    mat = sp.csr_array(np.array([[1.0, 0], [2j, 0]]))
    buf = io.StringIO()
    F.dump_matrix(mat, buf)
    assert buf.getvalue() == "0 0 1 0\n1 0 0 2\n"


def test_worker_cap(monkeypatch):
    monkeypatch.setenv("COHSTATE_THREADS", "3")
    assert F.max_workers() == 3
    monkeypatch.setenv("COHSTATE_THREADS", "x")
    with pytest.raises(ValueError, match="COHSTATE_THREADS"):
        F.max_workers()


@settings(max_examples=40, deadline=None)
@given(conserving_polys(3), st.integers(0, 4))
def test_matrix_of_adjoint(p, N):
    basis = F.enumerate_basis(3, N)
    m = F.matrix_of(p, basis).toarray()
    md = F.matrix_of(A.adjoint(p), basis).toarray()
    np.testing.assert_allclose(md, m.conj().T, atol=1e-12)


@pytest.mark.parametrize("N", [1, 2, 5, 8])
def test_l_commutes_with_casimir(N):
    ops = build_operators()
    basis = F.enumerate_basis(3, N)
    l = F.matrix_of(ops.l, basis)
    w2 = F.matrix_of(ops.w2, basis)
    assert abs(l @ w2 - w2 @ l).max() < 1e-10


@pytest.mark.parametrize("N", [2, 5, 8])
def test_block_spectra_union(N):
    h = build_operators().hamiltonian
    full, _ = F.eigensolve(F.matrix_of(h, F.enumerate_basis(3, N)))
    parts = np.concatenate([F.eigensolve(F.matrix_of(h, l_block(N, l)))[0] for l in range(-N, N + 1)])
    np.testing.assert_allclose(np.sort(parts), full, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_coherent_norm(data):
    f = data.draw(frames(n=3))
    occ = data.draw(occupancies(f.S, max_total=6))
    vec = F.coherent_vector(f, occ, F.enumerate_basis(3, sum(occ)))
    assert abs(vec.norm() - 1) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_annihilator_action_matches_expansion(data):
    f = data.draw(frames(n=3))
    occ = data.draw(occupancies(f.S, max_total=5))
    N = sum(occ)
    if N == 0:
        return
    r = data.draw(st.integers(1, 3))
    ket_basis, bra_basis = F.enumerate_basis(3, N), F.enumerate_basis(3, N - 1)
    lhs = F.matrix_of(A.OperatorPoly.annihilator(3, r), ket_basis, bra_basis) @ F.coherent_vector(
        f, occ, ket_basis
    ).amplitudes
    rhs = np.zeros(len(bra_basis), dtype=complex)
    for new_occ, amp in C.annihilate_product(f, occ, [r]):
        rhs += amp * F.coherent_vector(f, new_occ, bra_basis).amplitudes
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
