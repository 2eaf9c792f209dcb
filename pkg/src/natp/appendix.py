"""Kantorovich seminorm with complex coefficients (floating point).

Over C the optimal transfers may leave the support.  The helpers here compute
the support-restricted infimum, which is a weighted geometric median for
three points, and the full small-instance optimum.  They also reproduce the
four-point example with cube roots of unity and the Q(i) triangle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .vectors import FreeVector

__all__ = [
    "ConvergenceError",
    "ComplexResult",
    "weiszfeld",
    "support_restricted_complex_inf",
    "complex_norm_small",
    "appendix_example",
    "gaussian_rational_demo",
]


class ConvergenceError(RuntimeError):
    pass


@dataclass
class ComplexResult:
    value: float
    plan: list[tuple[str, str, complex]]
    iterations: int


def _coeffs(u) -> dict[str, complex]:
    if isinstance(u, FreeVector):
        return {x: u.field.to_complex(c) for x, c in u.terms}
    return {x: complex(c) for x, c in dict(u).items() if c != 0}


def weiszfeld(points: Sequence[complex], tol: float = 1e-12,
              weights: Sequence[float] | None = None, max_iter: int = 100_000):
    """Weighted geometric median of points in the plane.

    A data point is returned outright when it passes the vertex optimality
    test (the pull of the other points is at most its own weight).
    Otherwise Weiszfeld iteration runs from the weighted centroid; landing on
    a data point triggers a step off it along the descent direction
    (Vardi-Zhang).  Returns ``(point, value)``.
    """
    z = np.asarray(points, dtype=complex)
    if z.size == 0:
        raise ValueError("no points")
    w = np.ones(z.size) if weights is None else np.asarray(weights, dtype=float)
    if z.size == 1:
        return complex(z[0]), 0.0

    def value(t):
        return float(np.sum(w * np.abs(z - t)))

    for k in range(z.size):
        others = np.abs(z - z[k]) > 0
        pull = np.sum(w[others] * (z[k] - z[others]) / np.abs(z[k] - z[others]))
        if abs(pull) <= w[~others].sum():
            return complex(z[k]), value(z[k])

    t = complex(np.sum(w * z) / np.sum(w))
    scale = max(float(np.max(np.abs(z - t))), 1.0)
    for _ in range(max_iter):
        diff = z - t
        dist = np.abs(diff)
        hit = dist <= 1e-15 * scale
        if hit.any():
            others = ~hit
            own = w[hit].sum()
            grad = np.sum(w[others] * (t - z[others]) / dist[others])
            if abs(grad) <= own:
                return t, value(t)
            # step off the vertex along -grad
            inv = w[others] / dist[others]
            step = (abs(grad) - own) / np.sum(inv)
            t_new = t - step * grad / abs(grad)
        else:
            inv = w / dist
            t_new = complex(np.sum(inv * z) / np.sum(inv))
        if abs(t_new - t) <= tol * scale:
            t = t_new
            break
        t = t_new
    return complex(t), value(t)


def _pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _irls(weights: np.ndarray, A: np.ndarray, b: np.ndarray, tol: float,
          max_iter: int) -> tuple[np.ndarray, int]:
    """Minimise ``sum w_e |c_e|`` subject to ``A c = b`` over complex ``c``.

    Iteratively reweighted least squares on ``sum w_e sqrt(|c_e|^2 + delta^2)``
    (a majorise-minimise scheme, so each smoothed objective decreases
    monotonically), with ``delta`` shrunk by 10 after each stage.  Every
    iterate satisfies the constraints exactly in exact arithmetic.
    """
    w = np.maximum(weights, 1e-12)
    scale = max(float(np.max(np.abs(b))), 1.0)

    def lsq(omega):
        inv = 1.0 / omega
        M = (A * inv) @ A.T
        y = np.linalg.solve(M, b)
        return inv * (A.T @ y)

    c = lsq(w)
    delta = scale
    it = 0
    while delta > tol * 1e-3 * scale:
        prev = math.inf
        for _ in range(200):
            it += 1
            if it > max_iter:
                raise ConvergenceError("iteration cap reached")
            c = lsq(w / np.sqrt(np.abs(c) ** 2 + delta**2))
            f = float(np.sum(w * np.sqrt(np.abs(c) ** 2 + delta**2)))
            if prev - f <= 1e-15 * max(f, 1.0):
                break
            prev = f
        delta /= 10
    return c, it


def complex_norm_small(u, space, tol: float = 1e-6, max_iter: int = 20_000) -> ComplexResult:
    """Kantorovich seminorm over C using every point of a small ``space``.

    ``u`` is a :class:`FreeVector` over the real or complex field, or a
    mapping from labels to complex numbers summing to zero.
    """
    lam = _coeffs(u)
    labels = list(space.points)
    n = len(labels)
    if n > 6:
        raise ValueError("complex_norm_small handles at most 6 points")
    for x in lam:
        if x not in space:
            raise KeyError(f"unknown point {x!r}")
    if abs(sum(lam.values())) > 1e-9 * max(1.0, max(map(abs, lam.values()), default=1.0)):
        raise ValueError("coefficients must sum to zero")
    if not lam:
        return ComplexResult(0.0, [], 0)
    edges = _pairs(n)
    A = np.zeros((n - 1, len(edges)))
    for e, (i, j) in enumerate(edges):
        if i < n - 1:
            A[i, e] = 1.0
        if j < n - 1:
            A[j, e] = -1.0
    b = np.array([lam.get(x, 0) for x in labels[:-1]], dtype=complex)
    w = np.array([float(space.d(labels[i], labels[j])) for i, j in edges])
    c, it = _irls(w, A, b, tol, max_iter)
    value = float(np.sum(w * np.abs(c)))
    cut = 1e-9 * max(1.0, float(np.max(np.abs(c))))
    plan = [(labels[i], labels[j], complex(c[e])) for e, (i, j) in enumerate(edges)
            if abs(c[e]) > cut]
    return ComplexResult(value, plan, it)


def support_restricted_complex_inf(u, space, tol: float = 1e-9) -> ComplexResult:
    """Infimum of the sum-cost over decompositions that use support points only.

    For a three-point support ``{x0, x1, x2}`` the balance system leaves one
    free entry ``s = c01``; then ``c02 = l0 - s`` and ``c12 = l1 + s``, and the
    cost is a weighted sum of distances from ``s`` to ``0``, ``l0`` and
    ``-l1``, minimised by :func:`weiszfeld`.  Larger supports go to
    :func:`complex_norm_small` on the support subspace.
    """
    lam = _coeffs(u)
    labels = sorted(lam, key=space.index)
    if len(labels) < 2:
        return ComplexResult(0.0, [], 0)
    d = [[float(space.d(x, y)) for y in labels] for x in labels]
    if len(labels) == 2:
        x, y = labels
        return ComplexResult(abs(lam[x]) * d[0][1], [(x, y, lam[x])], 0)
    if len(labels) == 3:
        l0, l1 = lam[labels[0]], lam[labels[1]]
        s, value = weiszfeld([0, l0, -l1], tol=tol, weights=[d[0][1], d[0][2], d[1][2]])
        plan = [(labels[0], labels[1], s), (labels[0], labels[2], l0 - s),
                (labels[1], labels[2], l1 + s)]
        return ComplexResult(value, plan, 0)
    sub = _Sub(labels, space)
    return complex_norm_small(lam, sub, tol=tol)


class _Sub:
    def __init__(self, labels, space):
        self.points = tuple(labels)
        self._space = space

    def __contains__(self, x):
        return x in self.points

    def index(self, x):
        return self.points.index(x)

    def d(self, x, y):
        return self._space.d(x, y)


# --------------------------------------------------------------------------
# worked examples


def appendix_example(tol: float = 1e-9) -> dict:
    """The four-point space {e, p, q, r} with ``u = p + mu q + nu r``.

    ``mu, nu`` are the non-real cube roots of unity, ``d(p,q) = d(p,r) =
    d(q,r) = 1`` and ``d(e, .) = 1/2``.  Support points alone give sqrt(3),
    while routing through ``e`` gives 3/2.
    """
    from .classical import validate_metric

    h = Fraction(1, 2)
    space = validate_metric(
        ["e", "p", "q", "r"],
        [[0, h, h, h], [h, 0, 1, 1], [h, 1, 0, 1], [h, 1, 1, 0]],
    )
    mu, nu = cmath.exp(2j * math.pi / 3), cmath.exp(4j * math.pi / 3)
    u = {"p": 1.0, "q": mu, "r": nu}
    restricted = support_restricted_complex_inf(u, space, tol=tol)
    full = complex_norm_small(u, space, tol=tol)
    fermat, _ = weiszfeld([0, 1, -mu], tol=1e-15)
    return {
        "support_restricted": restricted.value,
        "full": full.value,
        "fermat_point": [fermat.real, fermat.imag],
        "expected": {"support_restricted": math.sqrt(3), "full": 1.5},
        "full_plan": [
            {"from": a, "to": b, "coeff": [c.real, c.imag]} for a, b, c in full.plan
        ],
    }


def gaussian_rational_demo(steps: int = 8, dps: int = 40) -> dict:
    """Fermat point of the triangle 0, 1, i and Q(i) points approaching it.

    For ``u = (1-i)p + iq - r`` on the unit triangle the support-restricted
    cost is ``|t| + |t - i| + |t - 1|``.  Its unique minimiser has irrational
    coordinates, so Gaussian rationals only approach the minimum.  The
    sequence below rounds the minimiser to ``10^-k`` and keeps the strictly
    decreasing part.
    """
    mpmath.mp.dps = dps
    # minimiser lies on the diagonal t = s(1+i) by symmetry
    s_star = (3 - mpmath.sqrt(3)) / 6
    t_star = mpmath.mpc(s_star, s_star)
    vertices = [mpmath.mpc(0, 0), mpmath.mpc(1, 0), mpmath.mpc(0, 1)]

    def cost(t):
        return sum(abs(t - v) for v in vertices)

    minimum = cost(t_star)
    seq = []
    last = None
    for k in range(1, steps + 1):
        q = Fraction(round(s_star * 10**k), 10**k)
        t = mpmath.mpc(mpmath.mpf(q.numerator) / q.denominator,
                       mpmath.mpf(q.numerator) / q.denominator)
        c = cost(t)
        if last is None or c < last:
            seq.append({"t": [str(q), str(q)], "cost": float(c), "gap": float(c - minimum)})
            last = c
    wz, wz_value = weiszfeld([0, 1, 1j], tol=1e-15)
    return {
        "fermat_point": [float(s_star), float(s_star)],
        "fermat_value": float(minimum),
        "closed_form": float(mpmath.sqrt(2 + mpmath.sqrt(3))),
        "weiszfeld_point": [wz.real, wz.imag],
        "weiszfeld_value": wz_value,
        "sequence": seq,
    }
