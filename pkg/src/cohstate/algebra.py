"""Polynomials in boson creation and annihilation operators.

Operators are stored as sums of operator words.  A word is a coefficient
times an ordered product of factors ``(mode, dagger)``; modes are 1-based.
:func:`normal_order` rewrites any polynomial into words with every creator
to the left of every annihilator, using ``[b_i, b_j^dagger] = delta_ij``.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

MERGE_TOL = 1e-12

Factor = tuple[int, bool]


@dataclass(frozen=True)
class Word:
    """Coefficient times an ordered product of ladder operators."""

    coeff: complex
    ops: tuple[Factor, ...]

    @property
    def creators(self) -> tuple[int, ...]:
        return tuple(m for m, dag in self.ops if dag)

    @property
    def annihilators(self) -> tuple[int, ...]:
        return tuple(m for m, dag in self.ops if not dag)

    def is_normal(self) -> bool:
        seen_annihilator = False
        for _, dag in self.ops:
            if dag and seen_annihilator:
                return False
            seen_annihilator = seen_annihilator or not dag
        return True


@dataclass(frozen=True)
class NormalTerm:
    """``coeff * prod(b^dagger_c for c in creators) * prod(b_a for a in annihilators)``.

    Both index lists are sorted ascending.  The body count is
    ``max(len(creators), len(annihilators))``.
    """

    coeff: complex
    creators: tuple[int, ...]
    annihilators: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeff", complex(self.coeff))
        object.__setattr__(self, "creators", tuple(sorted(self.creators)))
        object.__setattr__(self, "annihilators", tuple(sorted(self.annihilators)))

    @property
    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.creators, self.annihilators

    @property
    def body(self) -> int:
        return max(len(self.creators), len(self.annihilators))

    def to_word(self) -> Word:
        ops = tuple((c, True) for c in self.creators) + tuple(
            (a, False) for a in self.annihilators
        )
        return Word(self.coeff, ops)


@dataclass(frozen=True)
class OperatorPoly:
    """Sum of operator words acting on ``n`` boson modes."""

    n: int
    words: tuple[Word, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n: need at least one mode, got {self.n}")
        for w in self.words:
            for mode, _ in w.ops:
                _check_mode(mode, self.n)

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[NormalTerm]) -> OperatorPoly:
        return cls(n, tuple(t.to_word() for t in terms))

    @classmethod
    def scalar(cls, n: int, c: complex = 1.0) -> OperatorPoly:
        return cls(n, (Word(complex(c), ()),))

    @classmethod
    def identity(cls, n: int) -> OperatorPoly:
        return cls.scalar(n, 1.0)

    @classmethod
    def creator(cls, n: int, i: int) -> OperatorPoly:
        return cls(n, (Word(1.0 + 0j, ((i, True),)),))

    @classmethod
    def annihilator(cls, n: int, i: int) -> OperatorPoly:
        return cls(n, (Word(1.0 + 0j, ((i, False),)),))

    def is_normal_ordered(self) -> bool:
        return all(w.is_normal() for w in self.words)

    def terms(self) -> list[NormalTerm]:
        """The words as :class:`NormalTerm` objects; requires normal order."""
        if not self.is_normal_ordered():
            raise ValueError("operator is not normal ordered; call normal_order first")
        return [NormalTerm(w.coeff, w.creators, w.annihilators) for w in self.words]

    def __iter__(self) -> Iterator[Word]:
        return iter(self.words)

    def __len__(self) -> int:
        return len(self.words)

    def __add__(self, other: OperatorPoly) -> OperatorPoly:
        if not isinstance(other, OperatorPoly):
            return NotImplemented
        _check_same_n(self, other)
        return OperatorPoly(self.n, self.words + other.words)

    def __sub__(self, other: OperatorPoly) -> OperatorPoly:
        return self + (-1.0) * other

    def __neg__(self) -> OperatorPoly:
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, OperatorPoly):
            return multiply(self, other)
        if isinstance(other, (int, float, complex)):
            return OperatorPoly(
                self.n, tuple(Word(w.coeff * other, w.ops) for w in self.words)
            )
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def dagger(self) -> OperatorPoly:
        return adjoint(self)


def _check_mode(i: int, n: int) -> None:
    if not 1 <= i <= n:
        raise ValueError(f"mode index {i} out of range [1, {n}]")


def _check_same_n(p: OperatorPoly, q: OperatorPoly) -> None:
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: n={p.n} vs n={q.n}")


def bilinear(n: int, i: int, j: int, c: complex = 1.0) -> OperatorPoly:
    """``c * b_i^dagger b_j``."""
    _check_mode(i, n)
    _check_mode(j, n)
    return OperatorPoly(n, (Word(complex(c), ((i, True), (j, False))),))


def number_operator(n: int) -> OperatorPoly:
    """Total boson number ``sum_i b_i^dagger b_i``."""
    return OperatorPoly(n, tuple(Word(1.0 + 0j, ((i, True), (i, False))) for i in range(1, n + 1)))


def multiply(p: OperatorPoly, q: OperatorPoly) -> OperatorPoly:
    """Formal product ``p q``; words are concatenated, not reordered."""
    _check_same_n(p, q)
    return OperatorPoly(
        p.n, tuple(Word(a.coeff * b.coeff, a.ops + b.ops) for a in p.words for b in q.words)
    )


def adjoint(p: OperatorPoly) -> OperatorPoly:
    return OperatorPoly(
        p.n,
        tuple(
            Word(w.coeff.conjugate(), tuple((m, not dag) for m, dag in reversed(w.ops)))
            for w in p.words
        ),
    )


@lru_cache(maxsize=65536)
def _expand(ops: tuple[Factor, ...]) -> tuple[tuple[tuple, int], ...]:
    # integer-coefficient normal-ordered expansion of a bare word
    for k in range(len(ops) - 1):
        (i, di), (j, dj) = ops[k], ops[k + 1]
        if not di and dj:
            out: dict[tuple, int] = defaultdict(int)
            for key, c in _expand(ops[:k] + (ops[k + 1], ops[k]) + ops[k + 2:]):
                out[key] += c
            if i == j:
                for key, c in _expand(ops[:k] + ops[k + 2:]):
                    out[key] += c
            return tuple((key, c) for key, c in out.items() if c != 0)
    creators = tuple(sorted(m for m, dag in ops if dag))
    annihilators = tuple(sorted(m for m, dag in ops if not dag))
    return (((creators, annihilators), 1),)


def normal_order(p: OperatorPoly) -> OperatorPoly:
    """Rewrite ``p`` as a sum of normal-ordered terms with merged keys.

    Terms come out in first-appearance order, so the result is
    deterministic for a given input.
    """
    acc: dict[tuple, complex] = {}
    for w in p.words:
        for key, c in _expand(w.ops):
            acc[key] = acc.get(key, 0j) + w.coeff * c
    return OperatorPoly.from_terms(p.n, (NormalTerm(c, *key) for key, c in acc.items()))


def simplify(p: OperatorPoly, tol: float = MERGE_TOL) -> OperatorPoly:
    """Merge like normal-ordered terms and drop those with ``|coeff| < tol``."""
    acc: dict[tuple, complex] = {}
    for t in p.terms():
        acc[t.key] = acc.get(t.key, 0j) + t.coeff
    return OperatorPoly.from_terms(
        p.n, (NormalTerm(c, *key) for key, c in acc.items() if abs(c) >= tol and c != 0)
    )


def canonical(p: OperatorPoly, tol: float = MERGE_TOL) -> OperatorPoly:
    """Normal order, simplify and sort terms by key."""
    q = simplify(normal_order(p), tol)
    return OperatorPoly.from_terms(p.n, sorted(q.terms(), key=lambda t: (len(t.creators) + len(t.annihilators), t.key)))


def term_dict(p: OperatorPoly, tol: float = MERGE_TOL) -> dict[tuple, complex]:
    """``{(creators, annihilators): coeff}`` of the canonical form."""
    return {t.key: t.coeff for t in canonical(p, tol).terms()}


def allclose(p: OperatorPoly, q: OperatorPoly, atol: float = 1e-12) -> bool:
    """True if ``p`` and ``q`` are equal as operators (compared term by term)."""
    _check_same_n(p, q)
    diff = term_dict(p - q, tol=0.0)
    return all(abs(c) <= atol for c in diff.values())


def to_json(p: OperatorPoly) -> str:
    """Serialize the normal-ordered form of ``p``."""
    doc = {
        "n": p.n,
        "terms": [
            {
                "re": t.coeff.real,
                "im": t.coeff.imag,
                "creators": list(t.creators),
                "annihilators": list(t.annihilators),
            }
            for t in normal_order(p).terms()
        ],
    }
    return json.dumps(doc)


def from_json(text: str | dict) -> OperatorPoly:
    doc = json.loads(text) if isinstance(text, str) else text
    if not isinstance(doc, dict):
        raise ValueError("operator: expected a JSON object")
    n = doc.get("n")
    if not isinstance(n, int) or isinstance(n, bool):
        raise ValueError("n: expected an integer")
    raw = doc.get("terms")
    if not isinstance(raw, list):
        raise ValueError("terms: expected a list")
    terms = []
    for k, t in enumerate(raw):
        try:
            c = complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))
            creators = [int(i) for i in t.get("creators", [])]
            annihilators = [int(i) for i in t.get("annihilators", [])]
        except (TypeError, ValueError, AttributeError) as exc:
            raise ValueError(f"terms[{k}]: malformed term ({exc})") from None
        for i in creators + annihilators:
            if not 1 <= i <= n:
                raise ValueError(f"terms[{k}]: mode index {i} out of range [1, {n}]")
        terms.append(NormalTerm(c, creators, annihilators))
    return OperatorPoly.from_terms(n, terms)
