import math
from collections import Counter

import numpy as np
import pytest

from cohstate import algebra as A
from cohstate import vibron as V
from cohstate.coherent import expectation
from cohstate.fock import eigensolve, enumerate_basis, matrix_of

R_VALUES = [0.3, 1.0, 2.5]


def test_angular_momentum_on_fock_state():
    basis = enumerate_basis(3, 3)
    l = matrix_of(V.build_operators().l, basis).toarray()
    k = basis.index[(0, 2, 1)]
    assert l[k, k] == 1


def test_operator_hermiticity():
    ops = V.build_operators()
    assert A.allclose(A.adjoint(ops.d_plus), ops.d_minus)
    assert A.allclose(A.adjoint(ops.q_plus), ops.q_minus)
    assert A.allclose(A.adjoint(ops.w2), ops.w2)


@pytest.mark.parametrize("N", range(0, 7))
def test_casimir_spectrum(N):
    w, _ = eigensolve(matrix_of(V.build_operators().w2, enumerate_basis(3, N)))
    got = Counter(int(round(x)) for x in w)
    expected = Counter()
    for v in range(N // 2 + 1):
        omega = N - 2 * v
        expected[omega * (omega + 1)] += 2 * omega + 1
    assert got == expected
    assert np.allclose(w, np.round(w), atol=1e-9)


def test_exact_energy_values():
    assert V.exact_energy(100, 0, 0) == -10100
    assert V.exact_energy(2, 1, 0) == 0
    for N in (3, 8, 41):
        assert V.exact_energy(N, 0, N) == -N * (N + 1)


@pytest.mark.parametrize("args", [(4, 3, 0), (4, 1, 3), (4, -1, 0)])
def test_exact_energy_bounds(args):
    with pytest.raises(ValueError):
        V.exact_energy(*args)


@pytest.mark.parametrize("N", [5, 12, 40])
def test_exact_energy_first_difference(N):
    for v in range(1, N // 2 + 1):
        diff = V.exact_energy(N, v) - V.exact_energy(N, v - 1)
        assert diff == pytest.approx(4 * (N + 0.5) - 4 * (2 * v - 1))


def test_spectrum_n2():
    levels = V.spectrum_exact(2)
    assert len(levels) == 6
    v0 = [lev for lev in levels if lev.v == 0]
    v1 = [lev for lev in levels if lev.v == 1]
    assert sorted(lev.l for lev in v0) == [-2, -1, 0, 1, 2]
    assert all(abs(lev.E + 6) < 1e-12 for lev in v0)
    assert [(lev.l, round(lev.E, 12)) for lev in v1] == [(0, 0)]


@pytest.mark.parametrize("N", [1, 7, 20])
def test_spectrum_matches_closed_form(N):
    levels = V.spectrum_exact(N)
    assert len(levels) == math.comb(N + 2, 2)
    for lev in levels:
        ref = V.exact_energy(N, lev.v, lev.l)
        assert abs(lev.E - ref) <= 1e-8 * max(1.0, abs(ref))
    counts = Counter(lev.v for lev in levels)
    assert counts == {v: 2 * (N - 2 * v) + 1 for v in range(N // 2 + 1)}


def test_spectrum_guard():
    with pytest.raises(ValueError, match="N"):
        V.spectrum_exact(201)


def test_cs_w2_values():
    for N in (1, 5, 30):
        assert V.cs_w2(N, 0, 0.0) == 2 * N
        assert V.cs_w2(N, 0, 1.0) == N * N + N


@pytest.mark.parametrize("N", range(1, 11))
@pytest.mark.parametrize("r", R_VALUES)
def test_cs_w2_matches_engine(N, r):
    frame = V.vibron_frame(r)
    w2 = V.build_operators().w2
    for Nx in range(N + 1):
        val = expectation(frame, V.coherent_occupancy(N, Nx), w2)
        assert abs(val - V.cs_w2(N, Nx, r)) < 1e-10


def test_cs_energy_values():
    assert V.cs_energy(100, 0) == -10100
    for N in (10, 24):
        assert V.cs_energy(N, N // 2) == -N * (N + 1) + N * N
        for Nx in range(N + 1):
            assert V.cs_energy(N, Nx) == pytest.approx(-V.cs_w2(N, Nx, 1.0))
        for v in range(N // 2 + 1):
            assert V.exact_energy(N, v) - V.cs_energy(N, v) == 2 * v


@pytest.mark.parametrize("N", [2, 3, 10, 57, 100])
def test_minimize_r(N):
    r = V.minimize_r(N)
    assert abs(r - 1) < 1e-6
    e = V.variational_energy(N, r)
    assert abs(e + N * (N + 1)) <= 1e-9 * N * (N + 1)


def test_minimize_r_reports_multiple_minima():
    with pytest.raises(ValueError, match="not unimodal"):
        V.minimize_r(10, energy=lambda r: math.cos(3 * r))


@pytest.mark.parametrize("N", range(1, 11))
@pytest.mark.parametrize("r", R_VALUES)
def test_cs_transition_matches_engine(N, r):
    for Nx in range(N + 1):
        for delta in (0, -1):
            if Nx + delta < 0:
                continue
            for op in ("D+", "D-", "Q+", "Q-"):
                closed = V.cs_transition(N, Nx, delta, op, r)
                engine = V.cs_transition_engine(N, Nx, delta, op, r)
                assert abs(closed - engine) < 1e-10


def test_cs_transition_at_r1():
    N = 12
    for Nx in range(N + 1):
        assert V.cs_transition(N, Nx, 0, "dipole") == pytest.approx(-(N - 2 * Nx))
        if Nx >= 1:
            assert V.cs_transition(N, Nx, -1, "dipole") == 0
            assert V.cs_transition(N, Nx, -1, "quadrupole") == pytest.approx(
                -math.sqrt((N - Nx + 1) * Nx) / (2 * math.sqrt(2))
            )


def test_cs_transition_bounds():
    with pytest.raises(ValueError, match="delta"):
        V.cs_transition(4, 0, -1, "dipole")
    with pytest.raises(ValueError, match="op"):
        V.cs_transition(4, 1, 0, "octupole")


def test_dipole_between_representations_vanishes():
    N = 12
    for v in range(1, N // 2 + 1):
        for li in range(-(N - 2 * v), N - 2 * v + 1):
            lf = li - 1
            if abs(lf) <= N - 2 * v + 2:
                assert V.exact_transition(N, v, li, v - 1, lf, "D-") < 1e-10


def test_quadrupole_selection_rule():
    assert V.exact_transition(10, 1, 0, 1, 1, "Q+") == 0
    assert V.exact_transition(10, 1, 0, 1, 2, "Q+") > 0


def test_exact_transition_missing_state():
    with pytest.raises(ValueError):
        V.exact_transition(6, 3, 1, 3, 0, "D-")


def test_intra_dipole_converges():
    def worst(N):
        devs = []
        for v in range(int(0.8 * (N // 2)) + 1):
            ex = V.exact_transition(N, v, 1, v, 0, "D-")
            est = V.cs_transition(N, v, 0, "dipole") ** 2
            devs.append(abs(ex - est) / ex)
        return max(devs)

    assert worst(50) < worst(20)


def test_compare_report_small():
    N = 10
    rep = V.compare_report(N)
    assert set(rep) == {"energies", "dipole", "quadrupole"}
    for v, ex, cs, exr, csr in rep["energies"].rows:
        assert ex - cs == pytest.approx(2 * v)
        assert (csr - exr) * N**2 == pytest.approx(-2 * v)
    for row in rep["dipole"].rows[1:-1]:
        assert row[5] < 1e-10 and row[6] == 0
    # v = N/2 has only l = 0, so no l = 1 initial state
    assert rep["dipole"].rows[-1][5] is None
    last = rep["quadrupole"].rows[-1]
    assert last[1] is None and last[5] is None and last[6] is not None
