"""Occupation-number bases, exact operator matrices and coherent-state expansions.

This is the brute-force side of every cross-check: operators act on
occupation vectors by the textbook rules and coherent states are expanded
monomial by monomial, without going through :mod:`cohstate.coherent`.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterator, Sequence, TextIO

import numpy as np
import scipy.sparse as sp

from .algebra import OperatorPoly, normal_order
from .coherent import CoherentFrame, _occupancy

ORACLE_MAX_DIM = 10**5
HERMITIAN_TOL = 1e-10

State = tuple[int, ...]


def max_workers() -> int:
    """Worker cap from ``COHSTATE_THREADS`` (default: all cores)."""
    raw = os.environ.get("COHSTATE_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"COHSTATE_THREADS: expected an integer, got {raw!r}") from None
    return os.cpu_count() or 1


@dataclass(frozen=True)
class LinearConstraint:
    """Keep states with ``sum_i weights[i] * n_i == target``."""

    weights: tuple[int, ...]
    target: int

    def __call__(self, state: State) -> bool:
        return sum(w * k for w, k in zip(self.weights, state)) == self.target


@dataclass(frozen=True, eq=False)
class FockBasis:
    n: int
    N: int
    constraint: LinearConstraint | None
    states: tuple[State, ...]
    index: dict[State, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[State]:
        return iter(self.states)


def _compositions(N: int, n: int) -> Iterator[State]:
    # descending in n_1, then n_2, ...
    if n == 1:
        yield (N,)
        return
    for k in range(N, -1, -1):
        for rest in _compositions(N - k, n - 1):
            yield (k,) + rest


def enumerate_basis(n: int, N: int, constraint: LinearConstraint | None = None) -> FockBasis:
    if n < 1 or N < 0:
        raise ValueError(f"need n >= 1 and N >= 0, got n={n}, N={N}")
    if constraint is not None and len(constraint.weights) != n:
        raise ValueError(f"constraint: expected {n} weights, got {len(constraint.weights)}")
    states = tuple(s for s in _compositions(N, n) if constraint is None or constraint(s))
    return FockBasis(n, N, constraint, states, {s: k for k, s in enumerate(states)})


def apply_word(ops: Sequence[tuple[int, bool]], state: State) -> tuple[State, float] | None:
    """Act with a product of ladder operators (rightmost first) on an occupation vector.

    Returns ``(new_state, amplitude)`` or ``None`` if the result vanishes.
    """
    occ = list(state)
    weight = 1
    for mode, dag in reversed(ops):
        k = mode - 1
        if dag:
            occ[k] += 1
            weight *= occ[k]
        else:
            if occ[k] == 0:
                return None
            weight *= occ[k]
            occ[k] -= 1
    return tuple(occ), math.sqrt(weight)


def matrix_of(p: OperatorPoly, basis: FockBasis, bra_basis: FockBasis | None = None) -> sp.csr_array:
    """Exact matrix of ``p`` with columns on ``basis`` and rows on ``bra_basis``.

    Words are applied as written, without normal ordering.  ``bra_basis``
    defaults to ``basis``; raises if ``p`` maps a state outside it.
    """
    rows_basis = basis if bra_basis is None else bra_basis
    if p.n != basis.n or p.n != rows_basis.n:
        raise ValueError(f"dimension mismatch: operator has n={p.n}, basis has n={basis.n}")
    entries: dict[tuple[int, int], complex] = {}
    for col, state in enumerate(basis.states):
        for w in p.words:
            hit = apply_word(w.ops, state)
            if hit is None:
                continue
            new, amp = hit
            row = rows_basis.index.get(new)
            if row is None:
                raise ValueError(f"operator leaves the basis: {state} -> {new}")
            entries[row, col] = entries.get((row, col), 0j) + w.coeff * amp
    if entries:
        (r, c), v = zip(*entries.keys()), list(entries.values())
    else:
        r, c, v = (), (), []
    return sp.csr_array(
        (np.array(v, dtype=complex), (np.array(r, dtype=int), np.array(c, dtype=int))),
        shape=(len(rows_basis), len(basis)),
    )


@dataclass(frozen=True, eq=False)
class StateVector:
    basis: FockBasis
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: StateVector) -> complex:
        """``<self|other>``."""
        if self.basis.states != other.basis.states:
            raise ValueError("overlap: vectors live on different bases")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _species_poly(row: np.ndarray, N: int) -> dict[State, complex]:
    # (B^dagger)^N / sqrt(N!) as {exponents: coefficient of prod (b_i^dagger)^k_i}
    pref = math.sqrt(math.factorial(N))
    out = {}
    for ks in _compositions(N, len(row)):
        c = pref
        for a, k in zip(row, ks):
            c = c * a**k / math.factorial(k)
        out[ks] = c
    return out


def coherent_vector(frame: CoherentFrame, occ: Sequence[int], basis: FockBasis) -> StateVector:
    """Expand ``|N_1 ... N_S>`` in an unconstrained occupation basis."""
    occ = _occupancy(frame, occ)
    if basis.constraint is not None:
        raise ValueError("basis: coherent states need an unconstrained basis")
    if basis.n != frame.n:
        raise ValueError(f"basis: n={basis.n} does not match frame n={frame.n}")
    if sum(occ) != basis.N:
        raise ValueError(f"occupancy: total {sum(occ)} does not match basis N={basis.N}")
    poly: dict[State, complex] = {(0,) * frame.n: 1.0 + 0j}
    for row, Ns in zip(frame.alpha, occ):
        factor = _species_poly(row, Ns)
        nxt: dict[State, complex] = {}
        for k1, c1 in poly.items():
            for k2, c2 in factor.items():
                k = tuple(x + y for x, y in zip(k1, k2))
                nxt[k] = nxt.get(k, 0j) + c1 * c2
        poly = nxt
    amps = np.zeros(len(basis), dtype=complex)
    for ks, c in poly.items():
        amps[basis.index[ks]] = c * math.sqrt(math.prod(math.factorial(k) for k in ks))
    return StateVector(basis, amps)


def me_oracle(
    frame: CoherentFrame,
    occ_bra: Sequence[int],
    occ_ket: Sequence[int],
    p: OperatorPoly,
    max_dim: int = ORACLE_MAX_DIM,
) -> complex:
    """``<bra| p |ket>`` by explicit expansion in the occupation basis."""
    bra_occ = _occupancy(frame, occ_bra, "bra")
    ket_occ = _occupancy(frame, occ_ket, "ket")
    Nb, Nk = sum(bra_occ), sum(ket_occ)
    for N in (Nb, Nk):
        dim = math.comb(N + frame.n - 1, frame.n - 1)
        if dim > max_dim:
            raise ValueError(f"oracle: basis size {dim} exceeds guard {max_dim}")
    q = normal_order(p)
    ket_basis = enumerate_basis(frame.n, Nk)
    bra_basis = ket_basis if Nb == Nk else enumerate_basis(frame.n, Nb)
    # keep only the terms that connect the two particle-number sectors
    q = OperatorPoly.from_terms(p.n, [t for t in q.terms() if len(t.creators) - len(t.annihilators) == Nb - Nk])
    if not q.words:
        return 0j
    mat = matrix_of(q, ket_basis, bra_basis)
    ket = coherent_vector(frame, ket_occ, ket_basis).amplitudes
    bra = coherent_vector(frame, bra_occ, bra_basis).amplitudes
    return complex(np.vdot(bra, mat @ ket))


def eigensolve(h, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Full spectrum of a Hermitian matrix, eigenvalues ascending."""
    dense = h.toarray() if sp.issparse(h) else np.asarray(h)
    if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
        raise ValueError(f"matrix: expected square, got shape {dense.shape}")
    if dense.size == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    scale = max(1.0, float(np.max(np.abs(dense))))
    dev = float(np.max(np.abs(dense - dense.conj().T)))
    if dev > tol * scale:
        raise ValueError(f"matrix: not Hermitian (max deviation {dev:.3e})")
    return np.linalg.eigh(dense)


def dump_matrix(h, out: TextIO) -> None:
    """Coordinate text format: one ``row col re im`` line per stored entry."""
    coo = sp.coo_array(h)
    order = np.lexsort((coo.col, coo.row))
    for k in order:
        v = complex(coo.data[k])
        out.write(f"{coo.row[k]} {coo.col[k]} {v.real:.17g} {v.imag:.17g}\n")
