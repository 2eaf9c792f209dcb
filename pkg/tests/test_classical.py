import math
import random
from fractions import Fraction

import networkx as nx
import pytest

from natp import FieldSpec, normalize
from natp.classical import (
    kantorovich_real, min_cost_flow, real_decomposition_cost, reduce_real_decomposition,
    transport_bipartite, validate_metric,
)
from natp.ultrametric import MetricError
from natp.vectors import decompose, evaluate

R = FieldSpec("real")
F = Fraction


def random_metric(rng, n):
    # shortest-path closure of random weights is a metric
    pts = [f"p{i}" for i in range(n)]
    d = [[F(0) if i == j else F(rng.randint(1, 12), rng.choice([1, 2])) for j in range(n)]
         for i in range(n)]
    for i in range(n):
        for j in range(i):
            d[i][j] = d[j][i]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                d[i][j] = min(d[i][j], d[i][k] + d[k][j])
    return validate_metric(pts, d)


def random_balanced(rng, labels):
    pts = rng.sample(labels, rng.randint(2, len(labels)))
    coeffs = [F(rng.randint(-9, 9), rng.choice([1, 2, 3])) for _ in pts[:-1]]
    coeffs.append(-sum(coeffs))
    return normalize(zip(pts, coeffs), R)


def three_point_oracle(space, u):
    # one free entry s = c01; the cost is piecewise linear with kinks at 0, l0, -l1
    a, b, c = space.points
    l0, l1 = u.coeff(a), u.coeff(b)
    d01, d02, d12 = space.d(a, b), space.d(a, c), space.d(b, c)
    cost = lambda s: d01 * abs(s) + d02 * abs(l0 - s) + d12 * abs(l1 + s)
    return min(cost(s) for s in (F(0), l0, -l1))


def test_examples():
    sp = validate_metric("abc", [[0, 1, 1], [1, 0, 2], [1, 2, 0]])
    value, plan = kantorovich_real(sp, normalize([("a", F(2)), ("b", F(-1)), ("c", F(-1))], R))
    assert value == 2 and plan.cost == 2
    value, _ = kantorovich_real(sp, normalize([("b", F(1)), ("c", F(-1))], R))
    assert value == 2
    value, plan = kantorovich_real(sp, normalize([], R))
    assert value == 0 and plan.entries == []


def test_errors():
    with pytest.raises(MetricError):
        validate_metric("abc", [[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    sp = validate_metric("ab", [[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        kantorovich_real(sp, normalize([("a", F(1))], R))
    with pytest.raises(ValueError):
        min_cost_flow([F(1)], [])


def test_three_point_oracle():
    rng = random.Random(5)
    for _ in range(200):
        sp = random_metric(rng, 3)
        u = random_balanced(rng, list(sp.points))
        value, plan = kantorovich_real(sp, u)
        assert value == three_point_oracle(sp, u)
        assert evaluate([(c, i, j) for i, j, c in plan.entries], R) == u


def test_networkx_cross_check():
    rng = random.Random(9)
    for _ in range(60):
        sp = random_metric(rng, rng.randint(2, 7))
        u = random_balanced(rng, list(sp.points))
        value, _ = kantorovich_real(sp, u)
        scale_l = math.lcm(*(c.denominator for c in u.coeffs))
        scale_d = math.lcm(*(v.denominator for row in sp.dist for v in row))
        g = nx.DiGraph()
        for x in sp.points:
            g.add_node(x, demand=-int(u.coeff(x) * scale_l))
        for x in sp.points:
            for y in sp.points:
                if x != y:
                    g.add_edge(x, y, weight=int(sp.d(x, y) * scale_d))
        cost, _ = nx.network_simplex(g)
        assert value == F(cost, scale_l * scale_d)


def test_democratic_equals_bipartite():
    rng = random.Random(13)
    for _ in range(200):
        sp = random_metric(rng, rng.randint(2, 8))
        u = random_balanced(rng, list(sp.points))
        assert kantorovich_real(sp, u)[0] == transport_bipartite(sp, u)[0]


def test_seminorm_axioms():
    rng = random.Random(17)
    for _ in range(100):
        sp = random_metric(rng, 5)
        labels = list(sp.points)
        u, v = random_balanced(rng, labels), random_balanced(rng, labels)
        alpha = F(rng.randint(-5, 5), rng.randint(1, 4))
        nu, nv = kantorovich_real(sp, u)[0], kantorovich_real(sp, v)[0]
        assert kantorovich_real(sp, u + v)[0] <= nu + nv
        assert kantorovich_real(sp, u.scale(alpha))[0] == abs(alpha) * nu
        x, y = rng.sample(labels, 2)
        assert kantorovich_real(sp, normalize([(x, F(1)), (y, F(-1))], R))[0] == sp.d(x, y)


def test_reduction_examples():
    sp = validate_metric("xyz", [[0, 2, 1], [2, 0, 1], [1, 1, 0]])
    u = normalize([("x", F(3)), ("y", F(-3))], R)
    red = reduce_real_decomposition([(F(3), "x", "z"), (F(3), "z", "y")], sp, u)
    assert red.terms == [(F(3), "x", "y")] and red.trace[0]["rule"] == "3a"
    red = reduce_real_decomposition([(F(3), "x", "z"), (F(5), "z", "y"), (F(-2), "z", "y")], sp, u)
    assert "3b" in [t["rule"] for t in red.trace] or "3c" in [t["rule"] for t in red.trace]
    red = reduce_real_decomposition([(F(1), "x", "y"), (F(2), "x", "y")], sp, u)
    assert red.terms == [(F(3), "x", "y")] and red.trace[-1]["rule"] == "2"


def test_reduction_engine_random():
    rng = random.Random(21)
    for _ in range(200):
        sp = random_metric(rng, 6)
        labels = list(sp.points)
        u = random_balanced(rng, labels[:4])
        terms = [(F(rng.randint(-6, 6), rng.choice([1, 2])), *rng.sample(labels, 2))
                 for _ in range(rng.randint(1, 6))]
        dec = terms + decompose(u - evaluate(terms, R))
        red = reduce_real_decomposition(dec, sp, u)
        assert evaluate(red.terms, R) == u
        assert all(x in u.points and y in u.points for _, x, y in red.terms)
        assert real_decomposition_cost(red.terms, sp) <= real_decomposition_cost(dec, sp)
