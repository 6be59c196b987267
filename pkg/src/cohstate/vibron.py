"""Two-dimensional vibron model in its SO(3) dynamical-symmetry limit.

Modes are ``sigma -> 1``, ``tau_+ -> 2``, ``tau_- -> 3`` with circular bosons
``tau_pm^dagger = -+(tau_x^dagger +- i tau_y^dagger)/sqrt(2)``, so
``tau_x^dagger = (tau_-^dagger - tau_+^dagger)/sqrt(2)``.

The Hamiltonian is ``H = -W^2`` with ``W^2`` the SO(3) Casimir, whose
spectrum is ``-omega(omega+1)``, ``omega = N - 2v``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .algebra import OperatorPoly, bilinear
from .coherent import CoherentFrame, expectation, matrix_element_poly, validate_frame
from .fock import FockBasis, LinearConstraint, eigensolve, enumerate_basis, matrix_of, max_workers

SIGMA, TAU_PLUS, TAU_MINUS = 1, 2, 3
MAX_N = 200
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class VibronOperators:
    l: OperatorPoly
    d_plus: OperatorPoly
    d_minus: OperatorPoly
    q_plus: OperatorPoly
    q_minus: OperatorPoly
    w2: OperatorPoly
    hamiltonian: OperatorPoly

    def transition(self, name: str) -> OperatorPoly:
        table = {"D+": self.d_plus, "D-": self.d_minus, "Q+": self.q_plus, "Q-": self.q_minus}
        if name not in table:
            raise ValueError(f"op: expected one of {sorted(table)}, got {name!r}")
        return table[name]


# angular momentum carried by each transition operator
DELTA_L = {"D+": 1, "D-": -1, "Q+": 2, "Q-": -2}


@lru_cache(maxsize=1)
def build_operators() -> VibronOperators:
    def bl(i, j, c=1.0):
        return bilinear(3, i, j, c)

    s, p, m = SIGMA, TAU_PLUS, TAU_MINUS
    l = bl(p, p) - bl(m, m)
    d_plus = bl(p, s, _SQRT2) - bl(s, m, _SQRT2)
    d_minus = -(bl(m, s, _SQRT2) - bl(s, p, _SQRT2))
    q_plus = bl(p, m, _SQRT2)
    q_minus = bl(m, p, _SQRT2)
    w2 = 0.5 * (d_plus * d_minus + d_minus * d_plus) + l * l
    return VibronOperators(l, d_plus, d_minus, q_plus, q_minus, w2, -w2)


def vibron_frame(r: float) -> CoherentFrame:
    """Condensate and excitation bosons ``B_c(r)``, ``B_x(r)`` in circular modes."""
    norm = math.sqrt(1.0 + r * r)
    h = 1.0 / _SQRT2
    # tau_x = (tau_- - tau_+)/sqrt(2): coefficient -h on tau_+, +h on tau_-
    cond = [1.0, -r * h, r * h]
    exc = [-r, -h, h]
    return validate_frame(np.array([cond, exc]) / norm)


def coherent_occupancy(N: int, Nx: int) -> tuple[int, int]:
    if not 0 <= Nx <= N:
        raise ValueError(f"N_x: need 0 <= N_x <= N, got N_x={Nx}, N={N}")
    return (N - Nx, Nx)


class VibronLevel(NamedTuple):
    N: int
    v: int
    l: int
    E: float


def _check_levels(N: int, v: int, l: int) -> None:
    if N < 0:
        raise ValueError(f"N: must be nonnegative, got {N}")
    if not 0 <= v <= N // 2:
        raise ValueError(f"v: need 0 <= v <= {N // 2}, got {v}")
    if abs(l) > N - 2 * v:
        raise ValueError(f"l: need |l| <= {N - 2 * v} for v={v}, got {l}")


def exact_energy(N: int, v: int, l: int = 0) -> float:
    _check_levels(N, v, l)
    return -N * (N + 1) + 4 * v * ((N + 0.5) - v)


def _check_guard(N: int) -> None:
    if not 0 <= N <= MAX_N:
        raise ValueError(f"N: need 0 <= N <= {MAX_N}, got {N}")


def l_block(N: int, l: int) -> FockBasis:
    return enumerate_basis(3, N, LinearConstraint((0, 1, -1), l))


class Block(NamedTuple):
    basis: FockBasis
    energies: np.ndarray
    vectors: np.ndarray


def _solve_block(N: int, l: int) -> Block:
    basis = l_block(N, l)
    h = matrix_of(build_operators().hamiltonian, basis)
    w, vecs = eigensolve(h)
    return Block(basis, w, vecs)


@lru_cache(maxsize=8)
def solve_blocks(N: int) -> dict[int, Block]:
    """Diagonalize ``H`` in every angular-momentum block, keyed by ``l``."""
    _check_guard(N)
    ls = list(range(-N, N + 1))
    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        blocks = list(pool.map(lambda l: _solve_block(N, l), ls))
    return dict(zip(ls, blocks))


def spectrum_exact(N: int) -> list[VibronLevel]:
    """All levels, ``v`` assigned by ascending energy inside each ``l`` block."""
    out = []
    for l, block in solve_blocks(N).items():
        for v, e in enumerate(block.energies):
            out.append(VibronLevel(N, v, l, float(e)))
    return sorted(out, key=lambda lev: (lev.v, lev.l))


def cs_w2(N: int, Nx: int, r: float) -> float:
    """Closed-form Casimir expectation in the excited coherent state."""
    coherent_occupancy(N, Nx)
    return 2.0 * (N + Nx * (N - Nx)) + 4.0 * r * r / (1.0 + r * r) ** 2 * (N * (N - 1) - 6 * Nx * (N - Nx))


def cs_energy(N: int, Nx: int) -> float:
    coherent_occupancy(N, Nx)
    return float(-N * (N + 1) + 4 * Nx * (N - Nx))


def variational_energy(N: int, r: float, Nx: int = 0) -> float:
    """``<N N_x; r| H |N N_x; r>`` through the general coherent-state engine."""
    val = expectation(vibron_frame(r), coherent_occupancy(N, Nx), build_operators().hamiltonian)
    return val.real


def golden_section(f, lo: float, hi: float, tol: float = 1e-8) -> float:
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def minimize_r(N: int, lo: float = 1e-6, hi: float = 10.0, tol: float = 1e-8, energy=None) -> float:
    """Variational ``r`` minimizing the ground coherent-state energy."""
    if N < 2:
        raise ValueError(f"N: need N >= 2, got {N}")
    f = energy or (lambda r: variational_energy(N, r))
    grid = np.linspace(lo, hi, 201)
    vals = np.array([f(r) for r in grid])
    inner = (vals[1:-1] < vals[:-2]) & (vals[1:-1] < vals[2:])
    if inner.sum() > 1:
        raise ValueError(f"energy curve for N={N} is not unimodal on [{lo}, {hi}]")
    return golden_section(f, lo, hi, tol)


def cs_transition(N: int, Nx: int, delta: int, op: str, r: float = 1.0) -> float:
    """Coherent-state transition matrix element ``<N (N_x+delta); r| T |N N_x; r>``.

    ``op`` is ``"dipole"`` or ``"quadrupole"`` (both signs give the same value);
    ``delta`` is 0 (within an excitation) or -1 (to the next lower one).
    """
    coherent_occupancy(N, Nx)
    if delta not in (0, -1):
        raise ValueError(f"delta: expected 0 or -1, got {delta}")
    if Nx + delta < 0:
        raise ValueError(f"N_x: need N_x + delta >= 0, got N_x={Nx}, delta={delta}")
    op = _family(op)
    q = 1.0 + r * r
    if delta == 0:
        if op == "dipole":
            return -2.0 * (N - 2 * Nx) * r / q
        return -(Nx + (N - Nx) * r * r) / q / _SQRT2
    root = math.sqrt((N - Nx + 1) * Nx)
    if op == "dipole":
        return -root * (1.0 - r * r) / q
    return -root * r / q / _SQRT2


def _family(op: str) -> str:
    aliases = {"dipole": "dipole", "D": "dipole", "D+": "dipole", "D-": "dipole",
               "quadrupole": "quadrupole", "Q": "quadrupole", "Q+": "quadrupole", "Q-": "quadrupole"}
    if op not in aliases:
        raise ValueError(f"op: expected dipole or quadrupole, got {op!r}")
    return aliases[op]


def cs_transition_engine(N: int, Nx: int, delta: int, op: str, r: float = 1.0) -> float:
    """Same matrix element as :func:`cs_transition`, evaluated by the general engine.

    ``op`` names the operator: ``"D+"``, ``"D-"``, ``"Q+"`` or ``"Q-"``.
    """
    T = build_operators().transition(op)
    val = matrix_element_poly(
        vibron_frame(r), coherent_occupancy(N, Nx + delta), coherent_occupancy(N, Nx), T
    )
    return val.real


def exact_transition(N: int, v_i: int, l_i: int, v_f: int, l_f: int, op: str) -> float:
    """``|<v_f l_f| T |v_i l_i>|^2`` between diagonalized eigenstates."""
    T = build_operators().transition(op)
    _check_levels(N, v_i, l_i)
    _check_levels(N, v_f, l_f)
    if l_f != l_i + DELTA_L[op]:
        return 0.0
    blocks = solve_blocks(N)
    bi, bf = blocks[l_i], blocks[l_f]
    for b, v, l in ((bi, v_i, l_i), (bf, v_f, l_f)):
        if v >= len(b.energies):
            raise ValueError(f"state v={v}, l={l} not found in the N={N} spectrum")
    mat = matrix_of(T, bi.basis, bf.basis)
    amp = np.vdot(bf.vectors[:, v_f], mat @ bi.vectors[:, v_i])
    return float(abs(amp) ** 2)


class Table(NamedTuple):
    header: tuple[str, ...]
    rows: list[tuple]


def _opt(fn, *args):
    try:
        return fn(*args)
    except ValueError:
        return None


def _scaled(x, N):
    return None if x is None else x / N**2


def energy_table(N: int) -> Table:
    _check_guard(N)
    rows = []
    for v in range(N // 2 + 1):
        ex, cs = float(solve_blocks(N)[0].energies[v]), cs_energy(N, v)
        rows.append((v, ex, cs, ex / N**2, cs / N**2))
    return Table(("v", "exact", "coherent", "exact_rescaled", "coherent_rescaled"), rows)


def dipole_table(N: int) -> Table:
    """Intra ``(v,1)->(v,0)`` and inter ``(v,1)->(v-1,0)`` dipole intensities via ``D-``."""
    _check_guard(N)
    rows = []
    for v in range(N // 2 + 1):
        ex = _opt(exact_transition, N, v, 1, v, 0, "D-")
        cs = cs_transition(N, v, 0, "dipole") ** 2 if N - 2 * v >= 1 else None
        inter_ex = _opt(exact_transition, N, v, 1, v - 1, 0, "D-") if v >= 1 else None
        inter_cs = cs_transition(N, v, -1, "dipole") ** 2 if v >= 1 else None
        rows.append((v, ex, cs, _scaled(ex, N), _scaled(cs, N), inter_ex, inter_cs))
    return Table(
        ("v", "exact", "coherent", "exact_rescaled", "coherent_rescaled", "inter_exact", "inter_coherent"),
        rows,
    )


def quadrupole_table(N: int) -> Table:
    """Intra ``(v,2)->(v,0)`` via ``Q-``; inter ``(v,2)->(v-1,0)`` via ``Q-`` and ``(v,0)->(v-1,2)`` via ``Q+``."""
    _check_guard(N)
    rows = []
    for v in range(N // 2 + 1):
        ex = _opt(exact_transition, N, v, 2, v, 0, "Q-")
        cs = cs_transition(N, v, 0, "quadrupole") ** 2 if N - 2 * v >= 2 else None
        down = _opt(exact_transition, N, v, 2, v - 1, 0, "Q-") if v >= 1 else None
        up = _opt(exact_transition, N, v, 0, v - 1, 2, "Q+") if v >= 1 else None
        inter_cs = cs_transition(N, v, -1, "quadrupole") ** 2 if v >= 1 else None
        rows.append(
            (v, ex, cs, _scaled(ex, N), _scaled(cs, N), down, up, inter_cs,
             _scaled(down, N), _scaled(up, N), _scaled(inter_cs, N))
        )
    return Table(
        ("v", "exact", "coherent", "exact_rescaled", "coherent_rescaled",
         "inter_exact_20", "inter_exact_02", "inter_coherent",
         "inter_exact_20_rescaled", "inter_exact_02_rescaled", "inter_coherent_rescaled"),
        rows,
    )


def compare_report(N: int) -> dict[str, Table]:
    """Exact vs coherent-state energies and transition intensities per ``v``.

    Intensities are squared matrix elements; every quantity also appears
    rescaled by ``1/N^2``.  Missing entries (no such level) are ``None``.
    """
    return {"energies": energy_table(N), "dipole": dipole_table(N), "quadrupole": quadrupole_table(N)}
