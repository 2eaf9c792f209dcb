"""Graev ultra-norm on integer vectors and its comparison with field norms.

With integer coefficients the Graev norm is the smallest ``t`` such that ``u``
is a sum of differences ``x - y`` with ``d(x, y) <= t``.  This coincides with
the Kantorovich ultra-norm over the trivially valued rationals, which is how
:func:`graev_norm` computes it.  :func:`graev_threshold` is an independent
check.  It finds the least distance at which every connected component of
the support has coefficient sum zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

from .na_norm import BasepointWarning, na_norm, prepare_support
from .scalars import Cost, FieldError, FieldSpec
from .ultrametric import UltraSpace
from .vectors import FreeVector, normalize

__all__ = ["graev_norm", "graev_threshold", "tk_usp_compare", "ComparisonReport"]

TRIVIAL = FieldSpec("trivial")


def _as_integer_vector(u: FreeVector) -> FreeVector:
    f = u.field
    if f.kind == "finite-field":
        raise FieldError("integer vectors need a field of characteristic zero")
    out = []
    for x, c in u.terms:
        if not f.is_integer(c):
            raise FieldError(f"coefficient of {x!r} is not an integer")
        out.append((x, Fraction(f.as_integer(c))))
    return normalize(out, TRIVIAL)


def graev_norm(space: UltraSpace, u: FreeVector, *, basepoint=None, zero_distances=None) -> Fraction:
    """Graev ultra-norm of an integer vector, as an exact distance."""
    v = _as_integer_vector(u)
    cert = na_norm(space, v, basepoint=basepoint, zero_distances=zero_distances)
    # trivial valuation: every nonzero magnitude is 1, so the cost is a distance
    return cert.value.mantissa * cert.value.base ** (-cert.value.exponent)


def graev_threshold(space: UltraSpace, u: FreeVector, *, basepoint=None,
                    zero_distances=None) -> Fraction:
    """Least ``t`` with zero coefficient sum on every component of ``{d <= t}``."""
    v = _as_integer_vector(u)
    sub, labels, coeffs, _ = prepare_support(space, v, basepoint, zero_distances)
    n = len(labels)
    levels = sorted({Fraction(0)} | {sub.dist[i][j] for i in range(n) for j in range(n)})
    for t in levels:
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                i = parent[i]
            return i

        for i in range(n):
            for j in range(i + 1, n):
                if sub.dist[i][j] <= t:
                    parent[find(i)] = find(j)
        sums: dict[int, Fraction] = {}
        for i in range(n):
            sums[find(i)] = sums.get(find(i), Fraction(0)) + coeffs[i]
        if all(s == 0 for s in sums.values()):
            return t
    raise AssertionError("the whole support always balances")


@dataclass
class ComparisonReport:
    field: FieldSpec
    field_norm: Cost
    graev: Fraction
    equal: bool

    def to_json(self) -> dict:
        return {
            "field": self.field.to_json(),
            "field_norm": self.field_norm.to_json(),
            "graev": str(self.graev),
            "equal": self.equal,
            "trivial_on_rationals": self.field.trivial_on_rationals,
        }


def tk_usp_compare(space: UltraSpace, u: FreeVector, field: FieldSpec, *,
                   basepoint=None, zero_distances=None) -> ComparisonReport:
    """Norm of the integer vector ``u`` over ``field`` against its Graev norm.

    Equality is asserted for fields whose valuation is trivial on the
    rationals; for the p-adic fields any gap is only reported.
    """
    if not field.is_na or field.kind == "finite-field":
        raise FieldError("comparison needs a non-archimedean field of characteristic zero")
    v = _as_integer_vector(u)
    lifted = normalize(((x, field.from_rational(c)) for x, c in v.terms), field)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BasepointWarning)
        cert = na_norm(space, lifted, basepoint=basepoint, zero_distances=zero_distances)
        g = graev_norm(space, v, basepoint=basepoint, zero_distances=zero_distances)
    equal = cert.value == Cost(g, 0, field.base)
    if field.trivial_on_rationals and not equal:
        raise AssertionError("norms over a field trivial on Q must agree with the Graev norm")
    return ComparisonReport(field, cert.value, g, equal)
