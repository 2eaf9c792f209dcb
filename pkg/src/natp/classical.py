"""Classical Kantorovich norm over the reals, computed exactly.

The democratic problem lets mass move between any two support points; the
bipartite problem only ships from positive to negative coefficients.  Both are
uncapacitated min-cost flows and are solved with successive shortest paths
on rationals, so their optima can be compared for exact equality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .scalars import FieldError, fmt_frac
from .ultrametric import MetricError, validate_matrix
from .vectors import FreeVector, Term, evaluate
from .na_norm import Reduction

__all__ = [
    "MetricSpace",
    "RealPlan",
    "validate_metric",
    "min_cost_flow",
    "kantorovich_real",
    "transport_bipartite",
    "real_decomposition_cost",
    "reduce_real_decomposition",
]


@dataclass(frozen=True)
class MetricSpace:
    points: tuple[str, ...]
    dist: tuple[tuple[Fraction, ...], ...]

    def index(self, label: str) -> int:
        try:
            return self.points.index(label)
        except ValueError:
            raise KeyError(f"unknown point {label!r}") from None

    def __contains__(self, label) -> bool:
        return label in self.points

    def d(self, x: str, y: str) -> Fraction:
        return self.dist[self.index(x)][self.index(y)]

    def to_json(self) -> dict:
        return {
            "points": list(self.points),
            "metric": {"type": "matrix",
                       "values": [[fmt_frac(v) for v in row] for row in self.dist]},
        }


def validate_metric(points: Sequence[str], matrix) -> MetricSpace:
    """Symmetric nonnegative matrix obeying ``d(x,z) <= d(x,y) + d(y,z)``."""
    points = tuple(points)
    dist = validate_matrix(points, matrix)
    n = len(points)
    bad = [
        (points[i], points[j], points[k])
        for i, j, k in itertools.permutations(range(n), 3)
        if i < k and dist[i][k] > dist[i][j] + dist[j][k]
    ]
    if bad:
        x, y, z = bad[0]
        raise MetricError(f"triangle inequality fails: d({x},{z}) > d({x},{y}) + d({y},{z})", bad)
    return MetricSpace(points, dist)


@dataclass
class RealPlan:
    entries: list[tuple[str, str, Fraction]]
    cost: Fraction

    def to_json(self) -> dict:
        return {
            "entries": [{"from": i, "to": j, "coeff": fmt_frac(c)} for i, j, c in self.entries],
            "cost": fmt_frac(self.cost),
        }


def min_cost_flow(supply: Sequence[Fraction], arcs: Sequence[tuple[int, int, Fraction]]):
    """Uncapacitated min-cost flow by successive shortest paths (Bellman-Ford).

    ``supply[i] > 0`` is a source, ``< 0`` a sink, and supplies must sum to
    zero.  Returns ``(total cost, flow per arc)`` with exact rationals.  Each
    augmentation saturates a source or a sink, so there are at most ``n``
    of them.
    """
    n = len(supply)
    if sum(supply) != 0:
        raise ValueError("supplies must sum to zero")
    src, snk = n, n + 1
    # residual edges: [to, cap (None = infinite), cost, reverse index]
    graph: list[list[list]] = [[] for _ in range(n + 2)]

    def add(u, v, cap, cost):
        graph[u].append([v, cap, cost, len(graph[v])])
        graph[v].append([u, Fraction(0), -cost, len(graph[u]) - 1])
        return u, len(graph[u]) - 1

    handles = [add(u, v, None, Fraction(c)) for u, v, c in arcs]
    need = Fraction(0)
    for i, s in enumerate(supply):
        if s > 0:
            add(src, i, Fraction(s), Fraction(0))
            need += s
        elif s < 0:
            add(i, snk, Fraction(-s), Fraction(0))

    total = Fraction(0)
    while need > 0:
        dist: list[Fraction | None] = [None] * (n + 2)
        prev: list[tuple[int, int] | None] = [None] * (n + 2)
        dist[src] = Fraction(0)
        for _ in range(n + 1):
            changed = False
            for u in range(n + 2):
                if dist[u] is None:
                    continue
                for k, (v, cap, cost, _) in enumerate(graph[u]):
                    if cap is not None and cap <= 0:
                        continue
                    nd = dist[u] + cost
                    if dist[v] is None or nd < dist[v]:
                        dist[v], prev[v] = nd, (u, k)
                        changed = True
            if not changed:
                break
        if dist[snk] is None:
            raise ValueError("infeasible flow problem")
        path = []
        v = snk
        while v != src:
            u, k = prev[v]
            path.append((u, k))
            v = u
        push = need
        for u, k in path:
            cap = graph[u][k][1]
            if cap is not None and cap < push:
                push = cap
        for u, k in path:
            edge = graph[u][k]
            if edge[1] is not None:
                edge[1] -= push
            rev = graph[edge[0]][edge[3]]
            if rev[1] is not None:
                rev[1] += push
        total += push * dist[snk]
        need -= push
    flows = []
    for u, k in handles:
        v, _, _, r = graph[u][k]
        flows.append(graph[v][r][1])  # flow = residual capacity of the reverse edge
    return total, flows


def _support(u: FreeVector, space) -> tuple[list[str], list[Fraction]]:
    if u.field.kind not in ("real", "trivial", "p-adic"):
        raise FieldError("the classical solver needs rational coefficients")
    if not u.is_balanced:
        raise ValueError("the Kantorovich norm is defined on balanced vectors")
    for x in u.points:
        if x not in space:
            raise KeyError(f"unknown point {x!r}")
    labels = sorted(u.points, key=space.index)
    return labels, [Fraction(u.coeff(x)) for x in labels]


def _solve(space, labels, lam, arcs) -> tuple[Fraction, RealPlan]:
    costed = [(i, j, space.d(labels[i], labels[j])) for i, j in arcs]
    value, flows = min_cost_flow(lam, costed)
    entries = [(labels[i], labels[j], f) for (i, j), f in zip(arcs, flows) if f != 0]
    return value, RealPlan(entries, value)


def kantorovich_real(space, u: FreeVector) -> tuple[Fraction, RealPlan]:
    """Exact Kantorovich norm with transfers allowed between any two support points."""
    labels, lam = _support(u, space)
    arcs = [(i, j) for i in range(len(labels)) for j in range(len(labels)) if i != j]
    return _solve(space, labels, lam, arcs)


def transport_bipartite(space, u: FreeVector) -> tuple[Fraction, RealPlan]:
    """Classical transportation optimum from the positive part to the negative part."""
    labels, lam = _support(u, space)
    arcs = [(i, j) for i in range(len(labels)) for j in range(len(labels))
            if lam[i] > 0 and lam[j] < 0]
    return _solve(space, labels, lam, arcs)


def real_decomposition_cost(dec: Sequence[Term], space) -> Fraction:
    return sum((abs(Fraction(s)) * space.d(x, y) for s, x, y in dec), Fraction(0))


def reduce_real_decomposition(dec: Sequence[Term], space, u: FreeVector) -> Reduction:
    """Sum-cost reductions that move a decomposition onto the support.

    Signs are normalised to positive coefficients, then every off-support
    point ``z`` is removed by pairing an incoming ``a (x - z)`` with an
    outgoing ``b (z - y)`` (cases 3a, 3b, 3c).  Finally parallel terms
    are merged (rule 2).  Needs the ordinary triangle inequality.
    """
    field = u.field
    dec = [(Fraction(s), x, y) for s, x, y in dec]
    if dict(evaluate(dec, field).terms) != dict(u.terms):
        raise ValueError("decomposition does not evaluate to the vector")
    support = set(u.points)
    trace: list[dict] = []

    def tidy(terms):
        out = []
        for s, x, y in terms:
            if s == 0 or x == y:
                trace.append({"rule": "1", "term": (s, x, y)})
            elif s < 0:
                trace.append({"rule": "sign", "term": (s, x, y)})
                out.append((-s, y, x))
            else:
                out.append((s, x, y))
        return out

    terms = tidy(dec)
    while True:
        z = next((p for _, x, y in terms for p in (x, y) if p not in support), None)
        if z is None:
            break
        k_in = next(k for k, t in enumerate(terms) if t[2] == z)
        k_out = next(k for k, t in enumerate(terms) if t[1] == z)
        (a, x, _), (b, _, y) = terms[k_in], terms[k_out]
        rest = [t for k, t in enumerate(terms) if k not in (k_in, k_out)]
        if a == b:
            new, rule = [(a, x, y)], "3a"
        elif a < b:
            new, rule = [(a, x, y), (b - a, z, y)], "3b"
        else:
            new, rule = [(a - b, x, z), (b, x, y)], "3c"
        trace.append({"rule": rule, "point": z})
        terms = tidy(rest + new)

    merged: dict[tuple[str, str], Fraction] = {}
    for s, x, y in terms:
        if (x, y) in merged:
            trace.append({"rule": "2", "pair": (x, y)})
        merged[(x, y)] = merged.get((x, y), Fraction(0)) + s
    return Reduction([(s, x, y) for (x, y), s in merged.items()], trace)
