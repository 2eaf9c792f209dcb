"""Vectors of the free vector space on a point set, in normal form."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Iterable

from .scalars import FieldError, FieldSpec, Magnitude
from .ultrametric import ZERO

__all__ = [
    "FreeVector",
    "SupportInfo",
    "Term",
    "normalize",
    "support_info",
    "decompose",
    "evaluate",
    "gu_generators",
    "gu_elements",
    "gu_membership",
]

# (coefficient, x, y) stands for coefficient * (x - y); x, y may be ZERO
Term = tuple[Any, str, str]


@dataclass(frozen=True, eq=False)
class FreeVector:
    terms: tuple[tuple[str, Any], ...]
    field: FieldSpec

    def __eq__(self, other):
        if not isinstance(other, FreeVector):
            return NotImplemented
        return self.field == other.field and dict(self.terms) == dict(other.terms)

    def __hash__(self):
        return hash((self.field, frozenset(self.terms)))

    @property
    def points(self) -> list[str]:
        return [x for x, _ in self.terms]

    @property
    def coeffs(self) -> list:
        return [c for _, c in self.terms]

    def coeff(self, x: str):
        for y, c in self.terms:
            if y == x:
                return c
        return self.field.zero()

    def balance(self):
        return self.field.total(self.coeffs)

    @property
    def is_balanced(self) -> bool:
        return self.field.is_zero(self.balance())

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "FreeVector") -> "FreeVector":
        if other.field != self.field:
            raise FieldError("vectors over different fields")
        return normalize(self.terms + other.terms, self.field)

    def __neg__(self) -> "FreeVector":
        return FreeVector(tuple((x, self.field.neg(c)) for x, c in self.terms), self.field)

    def __sub__(self, other: "FreeVector") -> "FreeVector":
        return self + (-other)

    def scale(self, alpha) -> "FreeVector":
        return normalize(((x, self.field.mul(alpha, c)) for x, c in self.terms), self.field)

    def to_json(self) -> list[dict]:
        return [{"point": x, "coeff": self.field.format(c)} for x, c in self.terms]


def normalize(raw: Iterable[tuple[str, Any]], field: FieldSpec) -> FreeVector:
    """Merge repeated points and drop zero coefficients (first-occurrence order)."""
    acc: dict[str, Any] = {}
    for x, c in raw:
        if x == ZERO:
            raise ValueError(f"{ZERO!r} is a reserved label")
        field.check(c)
        acc[x] = field.add(acc[x], c) if x in acc else c
    return FreeVector(tuple((x, c) for x, c in acc.items() if not field.is_zero(c)), field)


@dataclass(frozen=True)
class SupportInfo:
    support: tuple[str, ...]
    m: int
    r: Magnitude | None  # None for archimedean fields
    zero_coeff: Any      # implied coefficient of ZERO, i.e. -balance

    @property
    def has_zero(self) -> bool:
        return ZERO in self.support


def support_info(u: FreeVector) -> SupportInfo:
    field = u.field
    bal = u.balance()
    support = tuple(u.points)
    if not field.is_zero(bal) or not support:
        support = support + (ZERO,)
    r = None
    if field.is_na:
        r = max((field.abs(c) for c in u.coeffs), default=Magnitude(None, field.base))
    return SupportInfo(support, len(support), r, field.neg(bal))


def decompose(u: FreeVector) -> list[Term]:
    """A decomposition ``u = sum s (x - y)``: a star at the first point, or at ZERO."""
    if not u.terms:
        return []
    if u.is_balanced:
        hub = u.terms[0][0]
        return [(c, x, hub) for x, c in u.terms[1:]]
    return [(c, x, ZERO) for x, c in u.terms]


def evaluate(dec: Iterable[Term], field: FieldSpec) -> FreeVector:
    """The vector a decomposition stands for; ZERO terms vanish."""
    raw = []
    for s, x, y in dec:
        field.check(s)
        if x != ZERO:
            raw.append((x, s))
        if y != ZERO:
            raw.append((y, field.neg(s)))
    return normalize(raw, field)


# --------------------------------------------------------------------------
# the subgroup generated by the coefficients


def gu_generators(u: FreeVector) -> list:
    return list(u.coeffs)


def gu_elements(u: FreeVector, budget: int) -> list:
    """Distinct values ``sum m_i lambda_i`` with ``|m_i| <= budget``, zero first."""
    field = u.field
    gens = list(u.coeffs)
    seen = {field.zero(): None}
    if not gens:
        return [field.zero()]
    multiples = [[field.times_int(k, g) for k in range(-budget, budget + 1)] for g in gens]
    for combo in itertools.product(*multiples):
        seen.setdefault(field.total(combo), None)
    return list(seen)


def gu_membership(u: FreeVector, c, budget: int = 3) -> bool | None:
    """Is ``c`` in the additive group generated by the coefficients of ``u``?

    True when found (subset sums are tried first), False when provably
    absent, None when the bounded search ``|m_i| <= budget`` is inconclusive.
    """
    field = u.field
    field.check(c)
    if field.is_zero(c):
        return True
    gens = list(u.coeffs)
    if not gens:
        return False
    for size in range(1, len(gens) + 1):
        for subset in itertools.combinations(gens, size):
            if field.total(subset) == c:
                return True
    if field.is_na and field.abs(c) > max(field.abs(g) for g in gens):
        return False
    multiples = [[field.times_int(k, g) for k in range(-budget, budget + 1)] for g in gens]
    for combo in itertools.product(*multiples):
        if field.total(combo) == c:
            return True
    if field.kind == "finite-field" and budget >= field.p - 1:
        return False
    return None
