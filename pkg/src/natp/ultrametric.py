"""Ultra-(pseudo)metric spaces on labelled points and their merge dendrograms."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .scalars import fmt_frac, frac

__all__ = [
    "ZERO",
    "MetricError",
    "UltraSpace",
    "Dendrogram",
    "DendroNode",
    "validate_ultrametric",
    "validate_matrix",
    "extend_with_zero",
    "build_dendrogram",
    "distances_from_merges",
]

# reserved label of the adjoined zero point
ZERO = "0̄"


class MetricError(ValueError):
    """Malformed matrix or a violated (strong) triangle inequality.

    ``violations`` lists every offending entry or triple; the message names
    the first one.
    """

    def __init__(self, message: str, violations: Sequence = ()):
        super().__init__(message)
        self.violations = list(violations)


def validate_matrix(points: Sequence[str], matrix) -> tuple[tuple[Fraction, ...], ...]:
    """Square, symmetric, nonnegative, zero diagonal; entries become Fractions."""
    n = len(points)
    if len(set(points)) != n:
        raise MetricError("duplicate point labels")
    if len(matrix) != n or any(len(row) != n for row in matrix):
        raise MetricError(f"distance matrix must be {n}x{n}")
    dist = tuple(tuple(frac(v) for v in row) for row in matrix)
    bad = []
    for i in range(n):
        if dist[i][i] != 0:
            bad.append(("diagonal", points[i]))
        for j in range(n):
            if dist[i][j] < 0:
                bad.append(("negative", points[i], points[j]))
            if j > i and dist[i][j] != dist[j][i]:
                bad.append(("asymmetric", points[i], points[j]))
    if bad:
        raise MetricError(f"malformed distance matrix: {bad[0]}", bad)
    return dist


@dataclass(frozen=True)
class UltraSpace:
    points: tuple[str, ...]
    dist: tuple[tuple[Fraction, ...], ...]
    pseudometric_allowed: bool = False
    has_zero_point: bool = False
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown point {label!r}") from None

    def __contains__(self, label) -> bool:
        return label in self._index

    def __len__(self) -> int:
        return len(self.points)

    def d(self, x: str, y: str) -> Fraction:
        return self.dist[self.index(x)][self.index(y)]

    def subspace(self, labels: Sequence[str]) -> "UltraSpace":
        idx = [self.index(x) for x in labels]
        return UltraSpace(
            tuple(labels),
            tuple(tuple(self.dist[i][j] for j in idx) for i in idx),
            self.pseudometric_allowed,
            ZERO in labels,
        )

    def diameter(self, labels: Sequence[str] | None = None) -> Fraction:
        labels = self.points if labels is None else labels
        return max((self.d(x, y) for x in labels for y in labels), default=Fraction(0))

    def scaled(self, factor) -> "UltraSpace":
        factor = Fraction(factor)
        return UltraSpace(
            self.points,
            tuple(tuple(v * factor for v in row) for row in self.dist),
            self.pseudometric_allowed,
            self.has_zero_point,
        )

    def to_json(self) -> dict:
        return {
            "points": list(self.points),
            "metric": {
                "type": "matrix",
                "values": [[fmt_frac(v) for v in row] for row in self.dist],
            },
        }


def validate_ultrametric(points: Sequence[str], matrix, pseudometric_allowed: bool = False,
                         *, has_zero_point: bool = False) -> UltraSpace:
    points = tuple(points)
    dist = validate_matrix(points, matrix)
    n = len(points)
    bad = []
    if not pseudometric_allowed:
        for i, j in itertools.combinations(range(n), 2):
            if dist[i][j] == 0:
                bad.append((points[i], points[j]))
        if bad:
            raise MetricError(
                f"zero distance between distinct points {bad[0]} "
                "(pseudometric not allowed)",
                bad,
            )
    for i, j, k in itertools.permutations(range(n), 3):
        if i < k and dist[i][k] > max(dist[i][j], dist[j][k]):
            bad.append((points[i], points[j], points[k]))
    if bad:
        x, y, z = bad[0]
        raise MetricError(
            f"strong triangle inequality fails: d({x},{z}) > max(d({x},{y}), d({y},{z}))",
            bad,
        )
    return UltraSpace(points, dist, pseudometric_allowed, has_zero_point)


def extend_with_zero(space: UltraSpace, basepoint: str | None = None,
                     zero_distances: Sequence | None = None) -> UltraSpace:
    """Append the isolated point ``ZERO``.

    By default ``d(x, ZERO) = max(d(x, basepoint), 1)``; explicit
    ``zero_distances`` (one per point) override the formula and are
    validated like any other distances.
    """
    if space.has_zero_point:
        raise ValueError("space already contains the zero point")
    if zero_distances is not None:
        if len(zero_distances) != len(space.points):
            raise MetricError("zero_distances needs one entry per point")
        col = [frac(v) for v in zero_distances]
    else:
        if basepoint is None:
            raise ValueError("a basepoint is required to extend with the zero point")
        b = space.index(basepoint)
        col = [max(row[b], Fraction(1)) for row in space.dist]
    rows = [list(row) + [col[i]] for i, row in enumerate(space.dist)]
    rows.append(col + [Fraction(0)])
    return validate_ultrametric(
        space.points + (ZERO,), rows, space.pseudometric_allowed, has_zero_point=True
    )


def distances_from_merges(points: Sequence[str], merges: Sequence[dict]) -> list[list[Fraction]]:
    """Distance matrix of a merge list ``[{"members": [...], "height": h}, ...]``.

    Merges are applied in order of height; two points are at distance ``h``
    once a merge of height ``h`` first joins their clusters.  The result is an
    ultra-pseudometric by construction.
    """
    index = {p: i for i, p in enumerate(points)}
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    dist: list[list[Fraction | None]] = [[None] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = Fraction(0)
    ordered = sorted(enumerate(merges), key=lambda t: (frac(t[1]["height"]), t[0]))
    for _, merge in ordered:
        h = frac(merge["height"])
        if h < 0:
            raise MetricError("negative merge height")
        try:
            members = [index[m] for m in merge["members"]]
        except KeyError as exc:
            raise MetricError(f"merge names unknown point {exc.args[0]!r}") from None
        roots = sorted({find(m) for m in members})
        for a, b in itertools.combinations(roots, 2):
            ga = [i for i in range(n) if find(i) == a]
            gb = [i for i in range(n) if find(i) == b]
            for i in ga:
                for j in gb:
                    if dist[i][j] is None:
                        dist[i][j] = dist[j][i] = h
        for r in roots[1:]:
            parent[r] = roots[0]
    if any(v is None for row in dist for v in row):
        raise MetricError("merges do not connect every point")
    return dist


# --------------------------------------------------------------------------
# dendrogram


@dataclass
class DendroNode:
    id: int
    points: tuple[int, ...]         # sorted point indices
    height: Fraction | None = None  # None for leaves
    children: tuple[int, ...] = ()
    parent: int | None = None

    @property
    def is_leaf(self) -> bool:
        return self.height is None


@dataclass
class Dendrogram:
    space: UltraSpace
    nodes: list[DendroNode]
    root: int

    def labels(self, node_id: int) -> list[str]:
        return [self.space.points[i] for i in self.nodes[node_id].points]

    def separation(self, node_id: int) -> Fraction:
        """Merge height of the node's parent (distance to everything outside it)."""
        parent = self.nodes[node_id].parent
        if parent is None:
            raise ValueError("the root has no separation")
        return self.nodes[parent].height

    def strict_clusters(self) -> list[int]:
        return [n.id for n in self.nodes if n.parent is not None]

    def lca_height(self, i: int, j: int) -> Fraction:
        if i == j:
            return Fraction(0)
        anc = set()
        a = i
        while a is not None:
            anc.add(a)
            a = self.nodes[a].parent
        b = j
        while b not in anc:
            b = self.nodes[b].parent
        return self.nodes[b].height

    def clusters_at(self, t: Fraction) -> list[tuple[int, ...]]:
        """Point sets of the maximal nodes with height <= t."""
        out = []
        for n in self.nodes:
            h = Fraction(0) if n.is_leaf else n.height
            ph = None if n.parent is None else self.nodes[n.parent].height
            if h <= t and (ph is None or ph > t):
                out.append(n.points)
        return sorted(out)

    def to_json(self) -> dict:
        return {
            "points": list(self.space.points),
            "merges": [
                {
                    "members": [self.space.points[self.nodes[c].points[0]] for c in n.children],
                    "height": fmt_frac(n.height),
                }
                for n in self.nodes
                if not n.is_leaf
            ],
        }


def build_dendrogram(space: UltraSpace) -> Dendrogram:
    """Single-linkage hierarchy of a validated ultra-(pseudo)metric.

    Leaves come first (node id = point index); internal nodes follow in order
    of height, and children are ordered by their smallest point index.
    """
    n = len(space.points)
    nodes = [DendroNode(i, (i,)) for i in range(n)]
    current = list(range(n))
    if n == 0:
        raise ValueError("empty space")
    heights = sorted({space.dist[i][j] for i in range(n) for j in range(i + 1, n)})
    for h in heights:
        # clusters at level h: d between clusters is constant for an ultrametric
        groups: list[list[int]] = []
        for c in current:
            rep = nodes[c].points[0]
            for g in groups:
                if space.dist[rep][nodes[g[0]].points[0]] <= h:
                    g.append(c)
                    break
            else:
                groups.append([c])
        nxt = []
        for g in groups:
            if len(g) == 1:
                nxt.append(g[0])
                continue
            g.sort(key=lambda c: nodes[c].points[0])
            node = DendroNode(
                len(nodes),
                tuple(sorted(p for c in g for p in nodes[c].points)),
                h,
                tuple(g),
            )
            for c in g:
                nodes[c].parent = node.id
            nodes.append(node)
            nxt.append(node.id)
        current = sorted(nxt, key=lambda c: nodes[c].points[0])
    assert len(current) == 1
    return Dendrogram(space, nodes, current[0])
