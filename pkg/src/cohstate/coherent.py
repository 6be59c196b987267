"""Matrix elements of normal-ordered boson operators between multi-species
coherent states.

A frame holds the coefficients ``alpha[s, i]`` of the coherent bosons
``B_s^dagger = sum_i alpha[s, i] b_i^dagger`` (rows orthonormal).  A state is
labelled by its occupancy ``(N_1, ..., N_S)`` and is normalized as
``prod_s (B_s^dagger)^{N_s} / sqrt(N_s!) |0>``.

Annihilating ``m`` bosons from such a state gives a sum over index tuples
``(t_1, ..., t_m)`` whose weight only depends on how many of the ``t_i``
equal each species (the multiplicity vector ``nu``).  Two evaluation routes
are provided: a literal double sum over bra and ket index tuples
(:func:`direct_sum`) and a collected form that groups the tuples by
multiplicity vector (:func:`annihilate_product`).
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .algebra import NormalTerm, OperatorPoly, normal_order

FRAME_TOL = 1e-10
DIRECT_LIMIT = 10**6

Occupancy = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class CoherentFrame:
    alpha: np.ndarray

    @property
    def S(self) -> int:
        return self.alpha.shape[0]

    @property
    def n(self) -> int:
        return self.alpha.shape[1]

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "S": self.S,
                "alpha": [[{"re": z.real, "im": z.imag} for z in row] for row in self.alpha.tolist()],
            }
        )


def validate_frame(alpha, tol: float = FRAME_TOL) -> CoherentFrame:
    """Check orthonormality of the rows of ``alpha`` and wrap it in a frame."""
    a = np.array(alpha, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"alpha: expected a non-empty S x n matrix, got shape {a.shape}")
    S, n = a.shape
    if S > n:
        raise ValueError(f"alpha: S={S} species exceeds n={n} modes")
    if not np.all(np.isfinite(a)):
        raise ValueError("alpha: non-finite coefficient")
    gram = a.conj() @ a.T
    dev = float(np.max(np.abs(gram - np.eye(S))))
    if dev > tol:
        raise ValueError(f"alpha: rows not orthonormal (max Gram deviation {dev:.3e})")
    a.setflags(write=False)
    return CoherentFrame(a)


def frame_from_json(text: str | dict) -> CoherentFrame:
    doc = json.loads(text) if isinstance(text, str) else text
    try:
        n, S, rows = doc["n"], doc["S"], doc["alpha"]
        alpha = [[complex(float(z["re"]), float(z.get("im", 0.0))) for z in row] for row in rows]
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ValueError(f"frame: malformed document ({exc!r})") from None
    if len(alpha) != S or any(len(row) != n for row in alpha):
        raise ValueError(f"alpha: shape does not match S={S}, n={n}")
    return validate_frame(alpha)


def random_frame(rng: np.random.Generator, S: int, n: int) -> CoherentFrame:
    """Random complex frame: the first ``S`` columns of a random unitary."""
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return validate_frame(q.T[:S])


def _occupancy(frame: CoherentFrame, occ: Sequence[int], name: str = "occupancy") -> Occupancy:
    occ = tuple(int(x) for x in occ)
    if len(occ) != frame.S:
        raise ValueError(f"{name}: expected {frame.S} entries, got {len(occ)}")
    if any(x < 0 for x in occ):
        raise ValueError(f"{name}: negative occupation in {occ}")
    return occ


def _check_modes(frame: CoherentFrame, modes: Sequence[int]) -> None:
    for r in modes:
        if not 1 <= r <= frame.n:
            raise ValueError(f"mode index {r} out of range [1, {frame.n}]")


def falling(N: int, k: int) -> int:
    """``N (N-1) ... (N-k+1)``; zero when ``k > N``."""
    return math.perm(N, k) if N >= 0 else 0


def multiplicity_vectors(m: int, S: int) -> Iterator[tuple[int, ...]]:
    """All ``nu`` with ``S`` nonnegative entries summing to ``m``, lexicographically descending."""
    if S == 1:
        yield (m,)
        return
    for first in range(m, -1, -1):
        for rest in multiplicity_vectors(m - first, S - 1):
            yield (first,) + rest


def multinomial(nu: Sequence[int]) -> int:
    out = math.factorial(sum(nu))
    for k in nu:
        out //= math.factorial(k)
    return out


def count_contributing(S: int, m: int) -> int:
    """Number of (bra, ket) index-tuple pairs with equal multiplicity vectors."""
    if S < 1 or m < 1:
        raise ValueError(f"need S >= 1 and m >= 1, got S={S}, m={m}")
    return sum(multinomial(nu) ** 2 for nu in multiplicity_vectors(m, S))


def collect_partitions(S: int, m: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Group keys ``(nu_bra, nu_ket)`` for the sum with occupancies kept symbolic."""
    if S < 1 or m < 0:
        raise ValueError(f"need S >= 1 and m >= 0, got S={S}, m={m}")
    nus = list(multiplicity_vectors(m, S))
    return [(a, b) for a in nus for b in nus]


def collected_coefficients(frame: CoherentFrame, modes: Sequence[int]) -> dict[tuple[int, ...], complex]:
    """``{nu: sum over t with multiplicities nu of prod_i alpha[t_i, r_i]}``.

    Built one mode at a time, so the cost is polynomial in ``len(modes)``.
    """
    S = frame.S
    coeffs: dict[tuple[int, ...], complex] = {(0,) * S: 1.0 + 0j}
    for r in modes:
        col = frame.alpha[:, r - 1]
        nxt: dict[tuple[int, ...], complex] = {}
        for nu, c in coeffs.items():
            for s in range(S):
                key = nu[:s] + (nu[s] + 1,) + nu[s + 1:]
                nxt[key] = nxt.get(key, 0j) + c * col[s]
        coeffs = nxt
    return coeffs


def annihilate_product(
    frame: CoherentFrame, occ: Sequence[int], modes: Sequence[int]
) -> list[tuple[Occupancy, complex]]:
    """Expand ``(prod_i b_{r_i}) |N_1 ... N_S>`` over coherent states.

    Returns ``(occupancy, amplitude)`` pairs, one per multiplicity vector
    that does not overannihilate any species.
    """
    occ = _occupancy(frame, occ)
    _check_modes(frame, modes)
    coeffs = collected_coefficients(frame, modes)
    out = []
    for nu in multiplicity_vectors(len(modes), frame.S):
        if any(k > N for k, N in zip(nu, occ)):
            continue
        weight = math.prod(falling(N, k) for N, k in zip(occ, nu))
        out.append((tuple(N - k for N, k in zip(occ, nu)), math.sqrt(weight) * coeffs[nu]))
    return out


def direct_sum(
    frame: CoherentFrame, occ_bra: Sequence[int], occ_ket: Sequence[int], term: NormalTerm
) -> tuple[complex, int]:
    """Literal double sum over bra and ket index tuples.

    Returns the matrix element and the number of index pairs that pass the
    occupancy constraint with a nonzero falling-factorial weight.
    """
    bra = _occupancy(frame, occ_bra, "bra")
    ket = _occupancy(frame, occ_ket, "ket")
    _check_modes(frame, term.creators + term.annihilators)
    if not term.creators and not term.annihilators:
        return (term.coeff if bra == ket else 0j), int(bra == ket)
    if sum(bra) - len(term.creators) != sum(ket) - len(term.annihilators):
        return 0j, 0
    S = frame.S
    a = frame.alpha

    def bucket(occ, modes, conj):
        # target occupancy -> [(sqrt weight, alpha product)] in tuple order
        out: dict[Occupancy, list[tuple[float, complex]]] = {}
        for t in itertools.product(range(S), repeat=len(modes)):
            nu = [0] * S
            for s in t:
                nu[s] += 1
            if any(k > N for k, N in zip(nu, occ)):
                continue
            amp = math.prod((a[s, r - 1] for s, r in zip(t, modes)), start=1.0 + 0j)
            if conj:
                amp = amp.conjugate()
            target = tuple(N - k for N, k in zip(occ, nu))
            w = math.prod(falling(N, k) for N, k in zip(occ, nu))
            out.setdefault(target, []).append((w, amp))
        return out

    bra_b = bucket(bra, term.creators, conj=True)
    ket_b = bucket(ket, term.annihilators, conj=False)
    total = 0j
    count = 0
    for target, kets in ket_b.items():
        for wb, ab in bra_b.get(target, ()):
            for wk, ak in kets:
                total += math.sqrt(wb * wk) * ab * ak
                count += 1
    return term.coeff * total, count


def _grouped(frame: CoherentFrame, bra: Occupancy, ket: Occupancy, term: NormalTerm) -> complex:
    left = dict(annihilate_product(frame, bra, term.creators))
    total = 0j
    for target, amp in annihilate_product(frame, ket, term.annihilators):
        if target in left:
            total += left[target].conjugate() * amp
    return term.coeff * total


def matrix_element(
    frame: CoherentFrame,
    occ_bra: Sequence[int],
    occ_ket: Sequence[int],
    term: NormalTerm,
    method: str = "auto",
) -> complex:
    """``<bra| term |ket>`` for a single normal-ordered term.

    ``method`` is ``"direct"`` (double sum over index tuples), ``"grouped"``
    (sum over multiplicity vectors) or ``"auto"``, which picks direct while
    the nominal ``S^(m'+m)`` tuple count stays below ``DIRECT_LIMIT``.
    """
    bra = _occupancy(frame, occ_bra, "bra")
    ket = _occupancy(frame, occ_ket, "ket")
    _check_modes(frame, term.creators + term.annihilators)
    if method == "auto":
        nominal = frame.S ** (len(term.creators) + len(term.annihilators))
        method = "direct" if nominal <= DIRECT_LIMIT else "grouped"
    if method == "direct":
        return direct_sum(frame, bra, ket, term)[0]
    if method == "grouped":
        if sum(bra) - len(term.creators) != sum(ket) - len(term.annihilators):
            return 0j
        return _grouped(frame, bra, ket, term)
    raise ValueError(f"method: unknown evaluation method {method!r}")


def _check_poly(frame: CoherentFrame, p: OperatorPoly) -> None:
    if p.n != frame.n:
        raise ValueError(f"dimension mismatch: operator has n={p.n}, frame has n={frame.n}")


def matrix_element_poly(
    frame: CoherentFrame,
    occ_bra: Sequence[int],
    occ_ket: Sequence[int],
    p: OperatorPoly,
    method: str = "auto",
) -> complex:
    """Normal order ``p`` and sum the matrix elements of its terms."""
    _check_poly(frame, p)
    return sum(
        (matrix_element(frame, occ_bra, occ_ket, t, method) for t in normal_order(p).terms()),
        start=0j,
    )


def expectation(frame: CoherentFrame, occ: Sequence[int], p: OperatorPoly) -> complex:
    """``<occ| p |occ>``; only terms with equal multiplicity vectors survive."""
    _check_poly(frame, p)
    occ = _occupancy(frame, occ)
    total = 0j
    for t in normal_order(p).terms():
        if len(t.creators) != len(t.annihilators):
            continue
        left = collected_coefficients(frame, t.creators)
        right = collected_coefficients(frame, t.annihilators)
        acc = 0j
        for nu, c in right.items():
            w = math.prod(falling(N, k) for N, k in zip(occ, nu))
            if w:
                acc += w * left[nu].conjugate() * c
        total += t.coeff * acc
    return total


def two_species_closed(
    frame: CoherentFrame, occ_bra: Sequence[int], occ_ket: Sequence[int], term: NormalTerm
) -> complex:
    """Closed-form one- and two-body matrix elements for two species.

    Independent of :func:`matrix_element`; used as a cross-check.
    """
    if frame.S != 2:
        raise ValueError(f"frame: closed forms need S=2, got S={frame.S}")
    bra = _occupancy(frame, occ_bra, "bra")
    ket = _occupancy(frame, occ_ket, "ket")
    _check_modes(frame, term.creators + term.annihilators)
    m = len(term.annihilators)
    if len(term.creators) != m or m > 2:
        raise ValueError(f"term: closed forms cover balanced 0-, 1- and 2-body terms, got {term.key}")
    if sum(bra) != sum(ket):
        return 0j
    N1, N2 = ket
    shift = bra[0] - N1

    def a(s, r):
        return frame.alpha[s - 1, r - 1]

    def ac(s, r):
        return frame.alpha[s - 1, r - 1].conjugate()

    if m == 0:
        val = 1.0 if shift == 0 else 0.0
    elif m == 1:
        (rp,), (r,) = term.creators, term.annihilators
        if shift == -1:
            val = math.sqrt(N1 * (N2 + 1)) * ac(2, rp) * a(1, r)
        elif shift == 0:
            val = N1 * ac(1, rp) * a(1, r) + N2 * ac(2, rp) * a(2, r)
        elif shift == 1:
            val = math.sqrt((N1 + 1) * N2) * ac(1, rp) * a(2, r)
        else:
            val = 0.0
    else:
        r1p, r2p = term.creators
        r1, r2 = term.annihilators
        mix_bra = ac(1, r2p) * ac(2, r1p) + ac(2, r2p) * ac(1, r1p)
        mix_ket = a(2, r1) * a(1, r2) + a(1, r1) * a(2, r2)
        if shift == -2:
            val = math.sqrt(falling(N1, 2) * falling(N2 + 2, 2)) * ac(2, r2p) * ac(2, r1p) * a(1, r1) * a(1, r2)
        elif shift == -1:
            root = math.sqrt(N1 * (N2 + 1)) if N1 >= 1 else 0.0
            val = (N1 - 1) * root * mix_bra * a(1, r1) * a(1, r2) + N2 * root * ac(2, r2p) * ac(
                2, r1p
            ) * mix_ket
        elif shift == 0:
            val = (
                falling(N1, 2) * ac(1, r2p) * ac(1, r1p) * a(1, r1) * a(1, r2)
                + falling(N2, 2) * ac(2, r2p) * ac(2, r1p) * a(2, r1) * a(2, r2)
                + N1 * N2 * mix_bra * mix_ket
            )
        elif shift == 1:
            root = math.sqrt((N1 + 1) * N2) if N2 >= 1 else 0.0
            val = N1 * root * ac(1, r2p) * ac(1, r1p) * mix_ket + (N2 - 1) * root * mix_bra * a(
                2, r1
            ) * a(2, r2)
        elif shift == 2:
            val = math.sqrt(falling(N1 + 2, 2) * falling(N2, 2)) * ac(1, r2p) * ac(1, r1p) * a(2, r1) * a(2, r2)
        else:
            val = 0.0
    return term.coeff * complex(val)
