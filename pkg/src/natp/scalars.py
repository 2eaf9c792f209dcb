"""Exact scalars of valued fields, their magnitudes, and transport costs.

A :class:`FieldSpec` describes one of the supported fields and does all the
arithmetic on raw element values:

==================  =====================================  =================
kind                raw value                              valuation
==================  =====================================  =================
``trivial``         :class:`fractions.Fraction`            trivial
``p-adic``          :class:`fractions.Fraction`            ``p ** -v_p(x)``
``finite-field``    ``int`` in ``[0, p)``                  trivial
``levi-civita``     :class:`LCSeries` (finite support)     ``b ** -min supp``
``real``            :class:`fractions.Fraction`            archimedean
``complex``         ``(Fraction, Fraction)``               archimedean
==================  =====================================  =================

Magnitudes are never stored as floats: a :class:`Magnitude` keeps the
exponent ``e`` of ``b ** -e`` and a :class:`Cost` keeps ``q * b ** -e`` with a
rational mantissa, so every comparison the solvers make is exact.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable

__all__ = [
    "FieldError",
    "FieldSpec",
    "LCSeries",
    "Magnitude",
    "Cost",
    "Scalar",
    "TruncationWarning",
    "frac",
    "fmt_frac",
    "is_prime",
    "scalar_add",
    "scalar_mul",
    "scalar_neg",
    "scalar_inv",
    "scalar_abs",
    "cost_compare",
    "strong_triangle_check",
]

KIND_ALIASES = {
    "trivial": "trivial",
    "trivial-rational": "trivial",
    "p-adic": "p-adic",
    "p-adic-rational": "p-adic",
    "padic": "p-adic",
    "finite": "finite-field",
    "finite-field": "finite-field",
    "gf": "finite-field",
    "levi-civita": "levi-civita",
    "real": "real",
    "complex": "complex",
}
NA_KINDS = frozenset({"trivial", "p-adic", "finite-field", "levi-civita"})


class FieldError(ValueError):
    """Bad field configuration, bad scalar, or an illegal operation."""


class TruncationWarning(UserWarning):
    """A Levi-Civita inverse was cut off at the configured order."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def frac(x: Any) -> Fraction:
    """Parse an exact rational from an int, Fraction or "num/den" string."""
    if isinstance(x, bool):
        raise FieldError(f"not a rational: {x!r}")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise FieldError(f"not a rational: {x!r}") from exc
    raise FieldError(f"not a rational: {x!r}")


def fmt_frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _vp(n: int, p: int) -> int:
    n = abs(n)
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


# --------------------------------------------------------------------------
# Levi-Civita series with finite support


class LCSeries:
    """Finite sum ``sum c_k * eps**q_k`` with rational exponents and coefficients.

    Terms are kept sorted by exponent with no zero coefficients, so equal
    series have equal ``terms`` tuples.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[Any, Any]] = ()):
        acc: dict[Fraction, Fraction] = {}
        for q, c in terms:
            q, c = Fraction(q), Fraction(c)
            acc[q] = acc.get(q, Fraction(0)) + c
        self.terms = tuple(sorted((q, c) for q, c in acc.items() if c != 0))

    @classmethod
    def const(cls, c) -> "LCSeries":
        return cls([(0, c)])

    def __repr__(self):
        inner = ", ".join(f"{fmt_frac(q)}:{fmt_frac(c)}" for q, c in self.terms)
        return f"LCSeries({{{inner}}})"

    def __eq__(self, other):
        return isinstance(other, LCSeries) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other: "LCSeries") -> "LCSeries":
        return LCSeries(self.terms + other.terms)

    def __neg__(self) -> "LCSeries":
        out = LCSeries()
        out.terms = tuple((q, -c) for q, c in self.terms)
        return out

    def __sub__(self, other: "LCSeries") -> "LCSeries":
        return self + (-other)

    def __mul__(self, other: "LCSeries") -> "LCSeries":
        return LCSeries(
            (q1 + q2, c1 * c2) for q1, c1 in self.terms for q2, c2 in other.terms
        )

    def leading(self) -> tuple[Fraction, Fraction]:
        return self.terms[0]

    def inverse(self, order: int) -> tuple["LCSeries", bool]:
        """Return ``(1/f, exact)``.

        Monomials invert exactly.  Otherwise ``f = a eps^k (1 + g)`` with
        ``g`` of positive order and the geometric series in ``-g`` is cut
        after ``order`` powers, which leaves an error of relative order
        greater than ``order * min supp(g)``.
        """
        if not self.terms:
            raise ZeroDivisionError("inverse of zero series")
        k, a = self.terms[0]
        lead_inv = LCSeries([(-k, 1 / a)])
        if len(self.terms) == 1:
            return lead_inv, True
        g = LCSeries((q - k, c / a) for q, c in self.terms[1:])
        lowest = g.terms[0][0]
        cutoff = lowest * order
        total = LCSeries.const(1)
        power = LCSeries.const(1)
        neg_g = -g
        for _ in range(order):
            power = LCSeries((q, c) for q, c in (power * neg_g).terms if q <= cutoff)
            if not power:
                break
            total = total + power
        return total * lead_inv, False


# --------------------------------------------------------------------------
# magnitudes and costs


@functools.total_ordering
@dataclass(frozen=True)
class Magnitude:
    """``b ** -exponent``, or zero when ``exponent`` is None."""

    exponent: Fraction | None
    base: Fraction = Fraction(2)

    @property
    def is_zero(self) -> bool:
        return self.exponent is None

    def __mul__(self, other: "Magnitude") -> "Magnitude":
        if self.base != other.base:
            raise FieldError("magnitudes with different bases")
        if self.is_zero or other.is_zero:
            return Magnitude(None, self.base)
        return Magnitude(self.exponent + other.exponent, self.base)

    def __lt__(self, other: "Magnitude") -> bool:
        if self.base != other.base:
            raise FieldError("magnitudes with different bases")
        if self.is_zero:
            return not other.is_zero
        if other.is_zero:
            return False
        return self.exponent > other.exponent

    def cost(self, distance: Fraction) -> "Cost":
        """The cost ``|c| * distance``."""
        if self.is_zero or distance == 0:
            return Cost.zero(self.base)
        return Cost(Fraction(distance), self.exponent, self.base)

    def approx(self) -> float:
        if self.is_zero:
            return 0.0
        return float(self.base) ** (-float(self.exponent))

    def to_json(self) -> dict:
        if self.is_zero:
            return {"zero": True, "base": fmt_frac(self.base)}
        return {"exponent": fmt_frac(self.exponent), "base": fmt_frac(self.base)}


def _canonical(q: Fraction, e: Fraction, b: Fraction) -> tuple[Fraction, Fraction]:
    # absorb powers of an integer base into the exponent
    if q == 0 or b.denominator != 1:
        return q, e
    n = b.numerator
    num, den = q.numerator, q.denominator
    while num % n == 0:
        num //= n
        e -= 1
    while den % n == 0:
        den //= n
        e += 1
    return Fraction(num, den), e


class Cost:
    """Exact nonnegative quantity ``mantissa * base ** -exponent``."""

    __slots__ = ("mantissa", "exponent", "base")

    def __init__(self, mantissa, exponent=0, base=2):
        q, e, b = Fraction(mantissa), Fraction(exponent), Fraction(base)
        if q < 0:
            raise FieldError("cost mantissa must be nonnegative")
        if b <= 1:
            raise FieldError("cost base must exceed 1")
        if q == 0:
            e = Fraction(0)
        self.mantissa, self.exponent = _canonical(q, e, b)
        self.base = b

    @classmethod
    def zero(cls, base=2) -> "Cost":
        return cls(0, 0, base)

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    def compare(self, other: "Cost") -> int:
        """Exact three-way comparison: -1, 0 or 1."""
        if self.base != other.base:
            raise FieldError(
                f"cannot compare costs with bases {self.base} and {other.base}"
            )
        if self.is_zero or other.is_zero:
            return (not self.is_zero) - (not other.is_zero)
        # q1 b^-e1 <=> q2 b^-e2  iff  (q1/q2)^den <=> b^num  with  e1-e2 = num/den
        delta = self.exponent - other.exponent
        lhs = (self.mantissa / other.mantissa) ** delta.denominator
        rhs = self.base ** delta.numerator
        return (lhs > rhs) - (lhs < rhs)

    def __eq__(self, other):
        if not isinstance(other, Cost):
            return NotImplemented
        return self.compare(other) == 0

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    __hash__ = None

    def scale(self, factor) -> "Cost":
        return Cost(self.mantissa * Fraction(factor), self.exponent, self.base)

    def times(self, mag: Magnitude) -> "Cost":
        if mag.base != self.base:
            raise FieldError("magnitude and cost use different bases")
        if mag.is_zero or self.is_zero:
            return Cost.zero(self.base)
        return Cost(self.mantissa, self.exponent + mag.exponent, self.base)

    def approx(self) -> float:
        if self.is_zero:
            return 0.0
        return float(self.mantissa) * float(self.base) ** (-float(self.exponent))

    def __repr__(self):
        return (
            f"Cost({fmt_frac(self.mantissa)} * {fmt_frac(self.base)}"
            f"^-({fmt_frac(self.exponent)}))"
        )

    def to_json(self) -> dict:
        return {
            "mantissa": fmt_frac(self.mantissa),
            "exponent": fmt_frac(self.exponent),
            "base": fmt_frac(self.base),
            "approx": self.approx(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Cost":
        return cls(frac(obj["mantissa"]), frac(obj["exponent"]), frac(obj["base"]))


def cost_max(costs: Iterable[Cost], base) -> Cost:
    best = Cost.zero(base)
    for c in costs:
        if c > best:
            best = c
    return best


def cost_compare(c1: Cost, c2: Cost) -> int:
    return c1.compare(c2)


# --------------------------------------------------------------------------
# field specification


@dataclass(frozen=True)
class FieldSpec:
    """A valued field together with its exact element arithmetic.

    ``base`` is the magnitude base ``b``; for the p-adic kind it is forced
    to ``p``.  ``truncation`` bounds Levi-Civita inverses of non-monomials.
    """

    kind: str
    p: int | None = None
    base: Fraction = Fraction(2)
    truncation: int = 8

    def __post_init__(self):
        kind = KIND_ALIASES.get(str(self.kind).lower())
        if kind is None:
            raise FieldError(f"unknown field kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        base = frac(self.base)
        if kind in ("p-adic", "finite-field"):
            if not isinstance(self.p, int) or isinstance(self.p, bool) or not is_prime(self.p):
                raise FieldError(f"{kind} needs a prime p, got {self.p!r}")
            if kind == "p-adic":
                base = Fraction(self.p)
        elif self.p is not None:
            raise FieldError(f"{kind} takes no prime")
        if base <= 1:
            raise FieldError("magnitude base must exceed 1")
        object.__setattr__(self, "base", base)

    # -- classification

    @property
    def is_na(self) -> bool:
        return self.kind in NA_KINDS

    @property
    def trivial_on_rationals(self) -> bool:
        return self.kind in ("trivial", "levi-civita")

    def describe(self) -> str:
        if self.kind == "p-adic":
            return f"Q_{self.p}"
        if self.kind == "finite-field":
            return f"GF({self.p})"
        return self.kind

    # -- elements

    def zero(self):
        return self.from_int(0)

    def one(self):
        return self.from_int(1)

    def from_int(self, k: int):
        return self.from_rational(Fraction(k))

    def from_rational(self, x):
        x = Fraction(x)
        if self.kind == "finite-field":
            if x.denominator % self.p == 0:
                raise FieldError(f"{x} has no image in GF({self.p})")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        if self.kind == "levi-civita":
            return LCSeries.const(x)
        if self.kind == "complex":
            return (x, Fraction(0))
        return x

    def is_zero(self, a) -> bool:
        if self.kind == "complex":
            return a[0] == 0 and a[1] == 0
        if self.kind == "levi-civita":
            return not a.terms
        return a == 0

    def check(self, a):
        """Raise unless ``a`` is a well-formed raw element of this field."""
        ok = {
            "trivial": isinstance(a, Fraction),
            "p-adic": isinstance(a, Fraction),
            "real": isinstance(a, Fraction),
            "finite-field": isinstance(a, int) and not isinstance(a, bool)
            and 0 <= a < (self.p or 0),
            "levi-civita": isinstance(a, LCSeries),
            "complex": isinstance(a, tuple) and len(a) == 2
            and all(isinstance(t, Fraction) for t in a),
        }[self.kind]
        if not ok:
            raise FieldError(f"{a!r} is not an element of {self.describe()}")
        return a

    # -- arithmetic

    def add(self, a, b):
        k = self.kind
        if k == "finite-field":
            return (a + b) % self.p
        if k == "complex":
            return (a[0] + b[0], a[1] + b[1])
        return a + b

    def neg(self, a):
        k = self.kind
        if k == "finite-field":
            return (-a) % self.p
        if k == "complex":
            return (-a[0], -a[1])
        return -a

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        k = self.kind
        if k == "finite-field":
            return a * b % self.p
        if k == "complex":
            return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])
        return a * b

    def inv(self, a):
        if self.is_zero(a):
            raise FieldError("division by zero")
        k = self.kind
        if k == "finite-field":
            return pow(a, -1, self.p)
        if k == "complex":
            n = a[0] * a[0] + a[1] * a[1]
            return (a[0] / n, -a[1] / n)
        if k == "levi-civita":
            out, exact = a.inverse(self.truncation)
            if not exact:
                warnings.warn(
                    f"Levi-Civita inverse truncated after {self.truncation} "
                    "powers of the tail",
                    TruncationWarning,
                    stacklevel=2,
                )
            return out
        return 1 / a

    def total(self, values: Iterable):
        acc = self.zero()
        for v in values:
            acc = self.add(acc, v)
        return acc

    def times_int(self, k: int, a):
        return self.mul(self.from_int(k), a)

    # -- valuation

    def abs(self, a) -> Magnitude:
        """Non-archimedean absolute value as an exact :class:`Magnitude`."""
        k = self.kind
        if not self.is_na:
            raise FieldError(f"{self.describe()} carries an archimedean absolute value")
        if self.is_zero(a):
            return Magnitude(None, self.base)
        if k == "p-adic":
            v = _vp(a.numerator, self.p) - _vp(a.denominator, self.p)
            return Magnitude(Fraction(v), self.base)
        if k == "levi-civita":
            return Magnitude(a.terms[0][0], self.base)
        return Magnitude(Fraction(0), self.base)

    def abs_float(self, a) -> float:
        """Usual absolute value for the archimedean kinds."""
        if self.kind == "complex":
            return abs(complex(float(a[0]), float(a[1])))
        if self.kind == "real":
            return float(abs(a))
        return self.abs(a).approx()

    def to_complex(self, a) -> complex:
        if self.kind == "complex":
            return complex(float(a[0]), float(a[1]))
        if self.kind == "real":
            return complex(float(a))
        raise FieldError(f"{self.describe()} does not embed in C")

    def is_integer(self, a) -> bool:
        """True when ``a`` is the image of an integer (trivially true in GF(p))."""
        if self.kind in ("trivial", "p-adic", "real"):
            return a.denominator == 1
        if self.kind == "finite-field":
            return True
        if self.kind == "levi-civita":
            return not a.terms or (
                len(a.terms) == 1 and a.terms[0][0] == 0 and a.terms[0][1].denominator == 1
            )
        return a[1] == 0 and a[0].denominator == 1

    def as_integer(self, a) -> int:
        if not self.is_integer(a):
            raise FieldError(f"{self.format(a)} is not an integer")
        if self.kind == "finite-field":
            return a
        if self.kind == "levi-civita":
            return int(a.terms[0][1]) if a.terms else 0
        if self.kind == "complex":
            return int(a[0])
        return int(a)

    # -- serialization

    def parse(self, obj):
        """Element from its JSON form (see README for the formats)."""
        k = self.kind
        if k == "finite-field":
            if isinstance(obj, str) and "mod" in obj:
                head, _, tail = obj.partition("mod")
                try:
                    residue, modulus = int(head), int(tail)
                except ValueError as exc:
                    raise FieldError(f"bad finite-field element {obj!r}") from exc
                if modulus != self.p:
                    raise FieldError(f"{obj!r} is not in GF({self.p})")
                return residue % self.p
            return self.from_rational(frac(obj))
        if k == "levi-civita":
            if isinstance(obj, list):
                try:
                    return LCSeries((frac(q), frac(c)) for q, c in obj)
                except (TypeError, ValueError) as exc:
                    raise FieldError(f"bad Levi-Civita element {obj!r}") from exc
            return LCSeries.const(frac(obj))
        if k == "complex":
            if isinstance(obj, list) and len(obj) == 2:
                return (frac(obj[0]), frac(obj[1]))
            return (frac(obj), Fraction(0))
        return frac(obj)

    def format(self, a):
        k = self.kind
        if k == "finite-field":
            return f"{a} mod {self.p}"
        if k == "levi-civita":
            return [[fmt_frac(q), fmt_frac(c)] for q, c in a.terms]
        if k == "complex":
            return [fmt_frac(a[0]), fmt_frac(a[1])]
        return fmt_frac(a)

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.p is not None:
            out["p"] = self.p
        if self.kind not in ("p-adic", "real", "complex"):
            out["base"] = fmt_frac(self.base)
        if self.kind == "levi-civita":
            out["note"] = (
                f"magnitudes use base {fmt_frac(self.base)} in place of e: "
                "|f| = base^(-min supp f)"
            )
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "FieldSpec":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise FieldError("field must be an object with a 'kind'")
        base = obj.get("base", 2)
        return cls(kind=obj["kind"], p=obj.get("p"), base=frac(base))


# --------------------------------------------------------------------------
# checked scalars for the public arithmetic API


@dataclass(frozen=True)
class Scalar:
    """A raw value tagged with its field; operators refuse mixed fields."""

    field: FieldSpec
    value: Any

    def __post_init__(self):
        self.field.check(self.value)

    @classmethod
    def of(cls, field: FieldSpec, obj) -> "Scalar":
        if isinstance(obj, (int, Fraction)) and not isinstance(obj, bool):
            return cls(field, field.from_rational(obj))
        return cls(field, field.parse(obj))

    def _same(self, other: "Scalar"):
        if not isinstance(other, Scalar):
            raise FieldError(f"{other!r} is not a Scalar")
        if other.field != self.field:
            raise FieldError(
                f"mixed fields: {self.field.describe()} and {other.field.describe()}"
            )

    def __add__(self, other):
        self._same(other)
        return Scalar(self.field, self.field.add(self.value, other.value))

    def __sub__(self, other):
        self._same(other)
        return Scalar(self.field, self.field.sub(self.value, other.value))

    def __mul__(self, other):
        self._same(other)
        return Scalar(self.field, self.field.mul(self.value, other.value))

    def __truediv__(self, other):
        self._same(other)
        return Scalar(self.field, self.field.mul(self.value, self.field.inv(other.value)))

    def __neg__(self):
        return Scalar(self.field, self.field.neg(self.value))

    def inverse(self) -> "Scalar":
        return Scalar(self.field, self.field.inv(self.value))

    def __abs__(self) -> Magnitude:
        return self.field.abs(self.value)

    def is_zero(self) -> bool:
        return self.field.is_zero(self.value)

    def to_json(self):
        return self.field.format(self.value)


def scalar_add(a: Scalar, b: Scalar) -> Scalar:
    return a + b


def scalar_mul(a: Scalar, b: Scalar) -> Scalar:
    return a * b


def scalar_neg(a: Scalar) -> Scalar:
    return -a


def scalar_inv(a: Scalar) -> Scalar:
    return a.inverse()


def scalar_abs(a: Scalar, spec: FieldSpec | None = None) -> Magnitude:
    if spec is not None and spec != a.field:
        raise FieldError("scalar does not belong to the given field")
    return abs(a)


def strong_triangle_check(a: Scalar, b: Scalar, spec: FieldSpec | None = None) -> bool:
    """``|a+b| <= max(|a|, |b|)``, with equality required when ``|a| != |b|``."""
    field = spec or a.field
    if not field.is_na:
        raise FieldError("strong triangle check needs a non-archimedean field")
    a._same(b)
    ma, mb = abs(a), abs(b)
    ms = abs(a + b)
    top = max(ma, mb)
    if ms > top:
        return False
    if ma != mb and ms != top:
        return False
    return True
