"""Kantorovich ultra-norms over non-archimedean fields.

The solver works on the support of the vector.  When the vector is not
balanced the isolated point ``ZERO`` joins the support with coefficient
``-sum(lambda)``.  On the merge dendrogram of the support every cluster ``C``
that is not the root gives a lower bound ``|lambda(C)| * sep(C)``.  The net
transfer out of ``C`` equals ``lambda(C)``, and every pair crossing the
boundary of ``C`` is at distance ``sep(C)``.  A bottom-up consolidation plan
attains the largest of these bounds, so that maximum is the norm and the
plan, together with the bounds, is a certificate.  Each coefficient of the
plan is a cluster sum.

``na_norm_bruteforce`` solves the same problem by enumeration over a bounded
piece of the coefficient group and serves as an independent oracle.
"""

from __future__ import annotations

import functools
import itertools
import warnings
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Any, Callable, Iterator, Sequence

from .scalars import Cost, FieldError, FieldSpec, Magnitude, cost_max, fmt_frac
from .ultrametric import ZERO, UltraSpace, build_dendrogram, extend_with_zero
from .vectors import FreeVector, Term, evaluate, gu_elements, support_info

__all__ = [
    "BasepointWarning",
    "PlanEntry",
    "CutBound",
    "NormCertificate",
    "Reduction",
    "prepare_support",
    "na_norm",
    "na_norm_pointed",
    "na_norm_bruteforce",
    "enumerate_plans",
    "plan_cost",
    "plan_net",
    "decomposition_cost",
    "reduce_decomposition",
    "reduce_to_subgroup",
    "zero_distance_presentation",
    "verify_certificate",
    "bounds",
    "seminorm_family",
]


class BasepointWarning(UserWarning):
    """The zero-point extension may depend on the implicit basepoint."""


@dataclass(frozen=True)
class PlanEntry:
    source: str
    target: str
    coeff: Any


@dataclass(frozen=True)
class CutBound:
    cluster: tuple[str, ...]
    total: Any
    sep: Fraction
    bound: Cost


@dataclass
class NormCertificate:
    value: Cost
    witness: list[PlanEntry]
    cut_bounds: list[CutBound]
    argmax_cluster: tuple[str, ...] | None
    field: FieldSpec
    support: tuple[str, ...]
    extension: dict | None = None

    def to_json(self) -> dict:
        f = self.field
        return {
            "field": f.to_json(),
            "value": self.value.to_json(),
            "support": list(self.support),
            "witness": [
                {"from": e.source, "to": e.target, "coeff": f.format(e.coeff)}
                for e in self.witness
            ],
            "cuts": [
                {
                    "cluster": list(c.cluster),
                    "sum": f.format(c.total),
                    "sep": fmt_frac(c.sep),
                    "bound": c.bound.to_json(),
                }
                for c in self.cut_bounds
            ],
            "argmax_cluster": None if self.argmax_cluster is None else list(self.argmax_cluster),
            "extension": self.extension,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "NormCertificate":
        f = FieldSpec.from_json(obj["field"])
        return cls(
            value=Cost.from_json(obj["value"]),
            witness=[PlanEntry(e["from"], e["to"], f.parse(e["coeff"])) for e in obj["witness"]],
            cut_bounds=[
                CutBound(tuple(c["cluster"]), f.parse(c["sum"]), Fraction(c["sep"]),
                         Cost.from_json(c["bound"]))
                for c in obj.get("cuts", [])
            ],
            argmax_cluster=None if obj.get("argmax_cluster") is None
            else tuple(obj["argmax_cluster"]),
            field=f,
            support=tuple(obj.get("support", ())),
            extension=obj.get("extension"),
        )


# --------------------------------------------------------------------------
# support preparation


def _require_na(field: FieldSpec):
    if not field.is_na:
        raise FieldError(
            f"{field.describe()} is archimedean; use the classical solver instead"
        )


def extended_space(space: UltraSpace, u: FreeVector, basepoint: str | None = None,
                   zero_distances=None) -> tuple[UltraSpace, dict | None]:
    """``space`` plus ``ZERO`` (unless already present) and a note on how it was added."""
    if space.has_zero_point:
        return space, {"mode": "given"}
    if zero_distances is not None:
        ext = extend_with_zero(space, zero_distances=zero_distances)
        return ext, {"mode": "zero_distances",
                     "values": [fmt_frac(ext.d(x, ZERO)) for x in space.points]}
    explicit = basepoint is not None
    if basepoint is None:
        basepoint = u.points[0] if u.terms else space.points[0]
    ext = extend_with_zero(space, basepoint=basepoint)
    note = {"mode": "basepoint", "basepoint": basepoint, "explicit": explicit}
    if not explicit and not u.is_balanced and space.diameter(u.points) > 1:
        warnings.warn(
            f"support diameter exceeds 1 and no basepoint was given; "
            f"the zero point was attached at {basepoint!r}",
            BasepointWarning,
            stacklevel=3,
        )
    return ext, note


def prepare_support(space: UltraSpace, u: FreeVector, basepoint: str | None = None,
                    zero_distances=None):
    """Support space, ordered support labels and their coefficients.

    Support points keep the order of ``space``; ``ZERO`` comes last and
    carries ``-balance(u)``.
    """
    for x in u.points:
        if x not in space:
            raise KeyError(f"unknown point {x!r}")
    info = support_info(u)
    note = None
    if info.has_zero:
        ext, note = extended_space(space, u, basepoint, zero_distances)
    else:
        ext = space
    labels = sorted((x for x in info.support if x != ZERO), key=ext.index)
    if info.has_zero:
        labels.append(ZERO)
    coeffs = [u.coeff(x) if x != ZERO else info.zero_coeff for x in labels]
    return ext.subspace(labels), labels, coeffs, note


# --------------------------------------------------------------------------
# the dendrogram solver


def _solve(sub: UltraSpace, coeffs: Sequence, field: FieldSpec):
    labels = sub.points
    base = field.base
    if len(labels) == 1:
        return Cost.zero(base), [], [], None
    tree = build_dendrogram(sub)
    totals: dict[int, Any] = {}
    reps: dict[int, int] = {}
    for node in tree.nodes:  # children precede parents
        if node.is_leaf:
            totals[node.id] = coeffs[node.id]
            reps[node.id] = node.id
        else:
            totals[node.id] = field.total(totals[c] for c in node.children)
            reps[node.id] = reps[node.children[0]]
    cuts = []
    for nid in tree.strict_clusters():
        sep = tree.separation(nid)
        bound = field.abs(totals[nid]).cost(sep)
        cuts.append(CutBound(tuple(tree.labels(nid)), totals[nid], sep, bound))
    witness = []
    for node in tree.nodes:
        if node.is_leaf:
            continue
        target = labels[reps[node.id]]
        for child in node.children[1:]:
            if not field.is_zero(totals[child]):
                witness.append(PlanEntry(labels[reps[child]], target, totals[child]))
    value = cost_max((c.bound for c in cuts), base)
    argmax = None
    for c in cuts:
        if c.bound == value:
            argmax = c.cluster
            break
    return value, witness, cuts, argmax


def na_norm(space: UltraSpace, u: FreeVector, field: FieldSpec | None = None, *,
            basepoint: str | None = None, zero_distances=None) -> NormCertificate:
    """Kantorovich ultra-norm of ``u`` with witness plan and cut certificate."""
    field = field or u.field
    if field != u.field:
        raise FieldError("vector and field disagree")
    _require_na(field)
    sub, labels, coeffs, note = prepare_support(space, u, basepoint, zero_distances)
    value, witness, cuts, argmax = _solve(sub, coeffs, field)
    return NormCertificate(value, witness, cuts, argmax, field, tuple(labels), note)


def na_norm_pointed(space: UltraSpace, u: FreeVector) -> NormCertificate:
    """Pointed version on balanced vectors: decompositions never leave ``space``."""
    field = u.field
    _require_na(field)
    if not u.is_balanced:
        raise ValueError("the pointed ultra-norm is defined on balanced vectors only")
    if not u.terms:
        return NormCertificate(Cost.zero(field.base), [], [], None, field, ())
    labels = sorted(u.points, key=space.index)
    coeffs = [u.coeff(x) for x in labels]
    value, witness, cuts, argmax = _solve(space.subspace(labels), coeffs, field)
    return NormCertificate(value, witness, cuts, argmax, field, tuple(labels))


def seminorm_family(spaces: Sequence[UltraSpace], u: FreeVector,
                    field: FieldSpec | None = None, **kwargs) -> list[NormCertificate]:
    if not spaces:
        return []
    pts = set(spaces[0].points)
    if any(set(s.points) != pts for s in spaces):
        raise ValueError("all spaces of a family must share one point set")
    return [na_norm(s, u, field, **kwargs) for s in spaces]


# --------------------------------------------------------------------------
# plans and decompositions


def plan_net(plan: Sequence[PlanEntry], field: FieldSpec) -> dict[str, Any]:
    net: dict[str, Any] = {}
    for e in plan:
        net[e.source] = field.add(net.get(e.source, field.zero()), e.coeff)
        net[e.target] = field.sub(net.get(e.target, field.zero()), e.coeff)
    return net


def plan_cost(plan: Sequence[PlanEntry], space: UltraSpace, field: FieldSpec) -> Cost:
    return cost_max(
        (field.abs(e.coeff).cost(space.d(e.source, e.target)) for e in plan), field.base
    )


def decomposition_cost(dec: Sequence[Term], space: UltraSpace, field: FieldSpec) -> Cost:
    return cost_max((field.abs(s).cost(space.d(x, y)) for s, x, y in dec), field.base)


@dataclass
class Reduction:
    terms: list[Term]
    trace: list[dict] = dc_field(default_factory=list)


def _same_vector(a: FreeVector, b: FreeVector) -> bool:
    return dict(a.terms) == dict(b.terms)


def _prune(terms: list[Term], field: FieldSpec, trace: list[dict]) -> list[Term]:
    out = []
    for s, x, y in terms:
        if field.is_zero(s) or x == y:
            trace.append({"rule": "1", "term": (s, x, y)})
            continue
        out.append((s, x, y))
    return out


def reduce_decomposition(dec: Sequence[Term], space: UltraSpace, u: FreeVector) -> Reduction:
    """Move a decomposition of ``u`` onto the support of ``u`` without raising its cost.

    Off-support points ``z`` are eliminated one at a time: with all terms at
    ``z`` written as ``s_k (a_k - z)``, the pair with the smallest ``|s_i|``
    and another ``s_j`` becomes ``s_i (a_i - a_j) + (s_i + s_j)(a_j - z)``.
    New coefficients are sums of old ones, so any additive subgroup holding
    the input coefficients also holds the output.  Terms on the same pair are
    merged at the end.
    """
    field = u.field
    dec = list(dec)
    if not _same_vector(evaluate(dec, field), u):
        raise ValueError("decomposition does not evaluate to the vector")
    support = set(support_info(u).support)
    trace: list[dict] = []
    terms = _prune(dec, field, trace)

    def off_support():
        seen = []
        for _, x, y in terms:
            for p in (x, y):
                if p not in support and p not in seen:
                    seen.append(p)
        return seen

    while True:
        pending = off_support()
        if not pending:
            break
        z = pending[0]
        rule = "4" if z == ZERO else "3"
        while True:
            at_z, rest = [], []
            for s, x, y in terms:
                if y == z:
                    at_z.append((s, x))
                elif x == z:
                    at_z.append((field.neg(s), y))  # s(z - y) = -s(y - z)
                else:
                    rest.append((s, x, y))
            if not at_z:
                break
            if len(at_z) == 1:  # coefficients at z sum to zero
                raise AssertionError("unbalanced off-support point")
            i = min(range(len(at_z)), key=lambda k: field.abs(at_z[k][0]))
            j = 0 if i != 0 else 1
            (si, ai), (sj, aj) = at_z[i], at_z[j]
            new = [(si, ai, aj), (field.add(si, sj), aj, z)]
            others = [(s, a, z) for k, (s, a) in enumerate(at_z) if k not in (i, j)]
            trace.append({"rule": rule, "point": z, "pair": (ai, aj)})
            terms = _prune(rest + new + others, field, trace)

    merged: dict[tuple[str, str], Any] = {}
    for s, x, y in terms:
        if (y, x) in merged:
            key, s = (y, x), field.neg(s)
        else:
            key = (x, y)
        if key in merged:
            trace.append({"rule": "merge", "pair": key})
            merged[key] = field.add(merged[key], s)
        else:
            merged[key] = s
    terms = _prune([(s, x, y) for (x, y), s in merged.items()], field, trace)
    return Reduction(terms, trace)


def reduce_to_subgroup(dec: Sequence[Term], space: UltraSpace, u: FreeVector,
                       contains: Callable[[Any], bool]) -> Reduction:
    """Rewrite a decomposition so every coefficient lies in a subgroup ``G``.

    ``contains`` decides membership in ``G``; the coefficients of ``u`` must
    lie in ``G``.  Two non-``G`` terms meeting at a point ``a``,
    ``P = p (a - b)`` and ``Q = q (c - a)`` with ``|q| <= |p|``, become
    ``q (c - b)`` and ``(p - q)(a - b)``, which removes one non-``G`` term at
    ``a`` and does not raise the cost.
    """
    field = u.field
    dec = list(dec)
    if not _same_vector(evaluate(dec, field), u):
        raise ValueError("decomposition does not evaluate to the vector")
    if not all(contains(c) for c in u.coeffs):
        raise ValueError("coefficients of the vector must lie in the subgroup")
    trace: list[dict] = []
    terms = _prune(dec, field, trace)
    points = []
    for _, x, y in terms:
        for p in (x, y):
            if p != ZERO and p not in points:
                points.append(p)
    for a in points:
        while True:
            bad = [k for k, (s, x, y) in enumerate(terms) if a in (x, y) and not contains(s)]
            if not bad:
                break
            if len(bad) == 1:
                raise AssertionError("a single non-G term cannot balance a point")
            # orient both as s(a - other)
            oriented = []
            for k in bad[:2]:
                s, x, y = terms[k]
                oriented.append((s, y) if x == a else (field.neg(s), x))
            (s1, b1), (s2, b2) = oriented
            if field.abs(s2) > field.abs(s1):
                (s1, b1), (s2, b2) = (s2, b2), (s1, b1)
            # s1(a - b1) + s2(a - b2) = -s2(b2 - b1) + (s1 + s2)(a - b1)
            new = [(field.neg(s2), b2, b1), (field.add(s1, s2), a, b1)]
            trace.append({"rule": "G", "point": a, "pair": (b1, b2)})
            keep = [t for k, t in enumerate(terms) if k not in bad[:2]]
            terms = _prune(keep + new, field, trace)
    return Reduction(terms, trace)


def zero_distance_presentation(space: UltraSpace, u: FreeVector) -> list[Term] | None:
    """A presentation of ``u`` by differences of points at distance zero, if any.

    ``space`` must already contain ``ZERO`` when ``u`` is unbalanced.  Pairs at
    distance zero are folded one by one; the vector is in the kernel exactly
    when this ends at zero.
    """
    field = u.field
    cur = dict(u.terms)
    out: list[Term] = []
    while cur:
        bal = field.total(cur.values())
        pts = sorted(cur, key=space.index)
        cand = pts + ([ZERO] if not field.is_zero(bal) and ZERO in space else [])
        pair = next(
            ((x, y) for x in pts for y in cand if y != x and space.d(x, y) == 0), None
        )
        if pair is None:
            return None
        x, y = pair
        lam = cur.pop(x)
        out.append((lam, x, y))
        if y != ZERO:
            merged = field.add(cur[y], lam)
            if field.is_zero(merged):
                del cur[y]
            else:
                cur[y] = merged
    return out


# --------------------------------------------------------------------------
# brute-force oracle


@functools.total_ordering
class _Key:
    """A cost with a float shortcut; exact comparison only on near-ties."""

    __slots__ = ("approx", "cost")

    def __init__(self, cost: Cost):
        self.cost = cost
        self.approx = cost.approx()

    def _cmp(self, other: "_Key") -> int:
        a, b = self.approx, other.approx
        if abs(a - b) > 1e-9 * max(a, b):
            return -1 if a < b else 1
        x, y = self.cost, other.cost
        if x.mantissa == y.mantissa and x.exponent == y.exponent:
            return 0
        return x.compare(y)

    def __eq__(self, other):
        return self._cmp(other) == 0

    def __lt__(self, other):
        return self._cmp(other) < 0


def _free_pairs(m: int) -> list[tuple[int, int]]:
    # row-major; the last point absorbs the dependent entries c[i][m-1]
    return [(i, j) for i in range(m - 1) for j in range(i + 1, m - 1)]


def _setup_oracle(space, u, budget, field, basepoint, zero_distances, max_support):
    field = field or u.field
    _require_na(field)
    if budget < 1:
        raise ValueError("budget must be at least 1")
    sub, labels, coeffs, _ = prepare_support(space, u, basepoint, zero_distances)
    m = len(labels)
    if m > max_support:
        raise ValueError(f"support of size {m} is too large for enumeration")
    cands = gu_elements(u, budget)
    return field, sub, labels, coeffs, cands


def _dependent(i, m, assign, coeffs, field):
    # row i: sum_j c_ij - sum_j c_ji = lambda_i  solved for c[i][m-1]
    val = coeffs[i]
    for j in range(i + 1, m - 1):
        val = field.sub(val, assign[(i, j)])
    for j in range(i):
        val = field.add(val, assign[(j, i)])
    return val


def _as_plan(assign, labels, field):
    return [
        PlanEntry(labels[i], labels[j], c)
        for (i, j), c in sorted(assign.items())
        if not field.is_zero(c)
    ]


def enumerate_plans(space: UltraSpace, u: FreeVector, budget: int,
                    field: FieldSpec | None = None, *, basepoint=None,
                    zero_distances=None) -> Iterator[list[PlanEntry]]:
    """Every upper-triangular plan whose free entries come from the bounded group."""
    field, sub, labels, coeffs, cands = _setup_oracle(
        space, u, budget, field, basepoint, zero_distances, 5)
    m = len(labels)
    if m == 1:
        yield []
        return
    free = _free_pairs(m)
    for values in itertools.product(cands, repeat=len(free)):
        assign = dict(zip(free, values))
        for i in range(m - 1):
            assign[(i, m - 1)] = _dependent(i, m, assign, coeffs, field)
        yield _as_plan(assign, labels, field)


def na_norm_bruteforce(space: UltraSpace, u: FreeVector, budget: int,
                       field: FieldSpec | None = None, *, basepoint=None,
                       zero_distances=None, return_plan: bool = False):
    """Minimum plan cost over the enumerated plans (an upper bound on the norm).

    The balance equations are solved for the column of the last support
    point; the remaining strictly upper-triangular entries range over
    ``{sum m_i lambda_i : |m_i| <= budget}``.  A branch-and-bound keeps only
    strict improvements on the best plan seen so far, so the returned value
    is the exact minimum over that search space.
    """
    field, sub, labels, coeffs, cands = _setup_oracle(
        space, u, budget, field, basepoint, zero_distances, 5)
    m = len(labels)
    base = field.base
    if m == 1:
        return (Cost.zero(base), []) if return_plan else Cost.zero(base)
    free = _free_pairs(m)
    d = sub.dist
    mag_cache: dict[Any, Magnitude] = {}

    def mag(val):
        if val not in mag_cache:
            mag_cache[val] = field.abs(val)
        return mag_cache[val]

    options = {
        (i, j): sorted(((c, _Key(mag(c).cost(d[i][j]))) for c in cands), key=lambda t: t[1])
        for i, j in free
    }
    # row i is complete once its last free pair is assigned
    completes: dict[int, list[int]] = {}
    for i in range(m - 1):
        last = max((k for k, (a, b) in enumerate(free) if i in (a, b)), default=-1)
        completes.setdefault(last, []).append(i)

    def entry_cost(i, val):
        return _Key(mag(val).cost(d[i][m - 1]))

    assign: dict[tuple[int, int], Any] = {}
    zero = field.zero()
    for pair in free:
        assign[pair] = zero
    for i in range(m - 1):
        assign[(i, m - 1)] = _dependent(i, m, assign, coeffs, field)
    best = max(_Key(mag(v).cost(d[i][j])) for (i, j), v in assign.items())
    best_assign = dict(assign)
    # net flow out of any proper subset S is lambda(S), so some entry crossing
    # the boundary of S has size >= |lambda(S)|
    floor = _Key(Cost.zero(base))
    for size in range(1, m):
        for S in itertools.combinations(range(m), size):
            rest = [j for j in range(m) if j not in S]
            gap = min(d[i][j] for i in S for j in rest)
            k = _Key(mag(field.total(coeffs[i] for i in S)).cost(gap))
            if k > floor:
                floor = k

    def close_rows(k, acc):
        """Fill dependent entries completed at step k; None if they are too costly."""
        worst = acc
        for i in completes.get(k, ()):
            val = _dependent(i, m, assign, coeffs, field)
            c = entry_cost(i, val)
            if c >= best:
                return None
            assign[(i, m - 1)] = val
            if c > worst:
                worst = c
        return worst

    def search(k, acc):
        nonlocal best, best_assign
        if k == len(free):
            if acc < best:
                best = acc
                best_assign = dict(assign)
            return
        pair = free[k]
        for val, c in options[pair]:
            if c >= best or best <= floor:
                break
            assign[pair] = val
            worst = close_rows(k, c if c > acc else acc)
            if worst is not None:
                search(k + 1, worst)

    start = close_rows(-1, _Key(Cost.zero(base)))
    if start is not None and floor < best:
        search(0, start)
    best = best.cost
    if return_plan:
        return best, _as_plan(best_assign, labels, field)
    return best


# --------------------------------------------------------------------------
# bounds and certificate checks


def bounds(u: FreeVector, space: UltraSpace, *, basepoint=None,
           zero_distances=None) -> tuple[Cost, Cost]:
    """``(r * l0, r * l1)`` over the support, ``r`` from the normal-form coefficients."""
    field = u.field
    _require_na(field)
    sub, labels, _, _ = prepare_support(space, u, basepoint, zero_distances)
    r = support_info(u).r
    if len(labels) < 2:
        z = Cost.zero(field.base)
        return z, z
    pairs = [sub.dist[i][j] for i in range(len(labels)) for j in range(i + 1, len(labels))]
    return r.cost(min(pairs)), r.cost(max(pairs))


def verify_certificate(cert: NormCertificate, space: UltraSpace, u: FreeVector) -> dict:
    """Re-check a certificate against the instance; one boolean per check."""
    field = u.field
    report: dict[str, bool] = {}
    ext = cert.extension or {}
    basepoint = ext.get("basepoint") if ext.get("mode") == "basepoint" else None
    zd = ext.get("values") if ext.get("mode") == "zero_distances" else None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BasepointWarning)
            sub, labels, coeffs, _ = prepare_support(space, u, basepoint, zd)
    except (KeyError, ValueError) as exc:
        return {"instance": False, "ok": False, "error": str(exc)}
    lam = dict(zip(labels, coeffs))
    on_support = all(e.source in lam and e.target in lam and e.source != e.target
                     for e in cert.witness)
    net = plan_net(cert.witness, field) if on_support else {}
    report["feasible"] = on_support and all(
        field.is_zero(field.sub(net.get(x, field.zero()), lam[x]))
        for x in labels if x != ZERO
    )
    try:
        report["witness_cost"] = on_support and plan_cost(cert.witness, sub, field) == cert.value
        value, _, cuts, _ = _solve(sub, coeffs, field)
        report["cut_bound"] = cert.value == value
        own = cost_max((c.bound for c in cert.cut_bounds), field.base)
        report["cut_list"] = own == cert.value
    except FieldError:
        report["witness_cost"] = report["cut_bound"] = report["cut_list"] = False
        cuts = []
    sums = [c.total for c in cuts]
    report["g_value"] = all(any(e.coeff == s for s in sums) for e in cert.witness)
    lo, hi = bounds(u, space, basepoint=basepoint, zero_distances=zd)
    try:
        report["bounds"] = lo <= cert.value <= hi
    except FieldError:
        report["bounds"] = False
    report["ok"] = all(report.values())
    return report
