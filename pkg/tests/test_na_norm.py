import random
from fractions import Fraction

import pytest

from conftest import NA_FIELDS, make_instances, random_coeff
from natp import (
    FieldError, FieldSpec, bounds, na_norm, na_norm_bruteforce, na_norm_pointed, normalize,
    reduce_decomposition, reduce_to_subgroup, validate_ultrametric, verify_certificate,
    zero_distance_presentation,
)
from natp.na_norm import (
    NormCertificate, PlanEntry, decomposition_cost, enumerate_plans, plan_cost, plan_net,
    prepare_support, seminorm_family,
)
from natp.scalars import Cost
from natp.ultrametric import ZERO, extend_with_zero
from natp.vectors import decompose, evaluate, support_info

F = Fraction
Q2 = FieldSpec("p-adic", p=2)
TRIV = FieldSpec("trivial")
ABC = validate_ultrametric("abc", [[0, 1, 2], [1, 0, 2], [2, 2, 0]])
EQ = validate_ultrametric(["x1", "x2", "x3"], [[0, 1, 1], [1, 0, 1], [1, 1, 0]])


def vec(field, **coeffs):
    return normalize([(k, field.parse(v)) for k, v in coeffs.items()], field)


def test_equilateral_example():
    cert = na_norm(EQ, vec(Q2, x1=2, x2=2, x3=-4))
    assert cert.value == Cost(F(1, 2))


def test_three_point_example():
    u = vec(Q2, a=1, b=2, c=-3)
    cert = na_norm(ABC, u)
    assert cert.value == Cost(2)
    assert verify_certificate(cert, ABC, u)["ok"]
    assert na_norm_bruteforce(ABC, u, 3) == Cost(2)
    # the plan c_ab = 1, c_bc = 3 is also optimal
    other = [PlanEntry("a", "b", F(1)), PlanEntry("b", "c", F(3))]
    assert plan_cost(other, ABC, Q2) == Cost(2)
    lo, hi = bounds(u, ABC)
    assert lo == Cost(1) and hi == Cost(2)  # r = |1|_2 = 1, l0 = 1, l1 = 2


def test_isometry_and_kernel_examples():
    for field in NA_FIELDS:
        u = normalize([("a", field.one()), ("c", field.neg(field.one()))], field)
        assert na_norm(ABC, u).value == Cost(2, 0, field.base)
    ps = validate_ultrametric("ab", [[0, 0], [0, 0]], True)
    assert na_norm(ps, vec(TRIV, a=5, b=-5)).value.is_zero


def test_archimedean_rejected():
    with pytest.raises(FieldError):
        na_norm(ABC, vec(FieldSpec("real"), a=1, b=-1))
    with pytest.raises(KeyError):
        na_norm(ABC, vec(Q2, z=1))


def test_bruteforce_small_cases():
    u = vec(Q2, a=4, b=-4)
    assert na_norm_bruteforce(ABC, u, 1) == Cost(F(1, 4))
    assert na_norm_bruteforce(EQ, vec(Q2, x1=2, x2=2, x3=-4), 1) == Cost(F(1, 2))
    with pytest.raises(ValueError):
        na_norm_bruteforce(ABC, u, 0)


def test_enumerate_plans_are_feasible():
    u = vec(Q2, a=1, b=2, c=-3)
    plans = list(enumerate_plans(ABC, u, 1))
    assert plans
    best = min((plan_cost(p, ABC, Q2) for p in plans), key=lambda c: c.approx())
    assert best == na_norm(ABC, u).value
    for p in plans:
        net = plan_net(p, Q2)
        assert all(net.get(x, 0) == u.coeff(x) for x in "abc")


@pytest.mark.parametrize("field", NA_FIELDS, ids=lambda f: f.describe())
def test_oracle_agreement(field):
    done = 0
    for inst in make_instances(field, 80, seed0=500):
        if support_info(inst.vector).m > 4:
            continue
        cert = na_norm(inst.space, inst.vector, basepoint=inst.basepoint)
        brute = na_norm_bruteforce(inst.space, inst.vector, 2, basepoint=inst.basepoint)
        assert cert.value == brute
        done += 1
    assert done >= 30


@pytest.mark.parametrize("field", NA_FIELDS, ids=lambda f: f.describe())
def test_certificates(field):
    for inst in make_instances(field, 60, points=6, seed0=900):
        cert = na_norm(inst.space, inst.vector, basepoint=inst.basepoint)
        report = verify_certificate(cert, inst.space, inst.vector)
        assert report["ok"], report
        again = NormCertificate.from_json(cert.to_json())
        assert verify_certificate(again, inst.space, inst.vector)["ok"]


def test_tampered_certificates_fail():
    u = vec(Q2, a=1, b=2, c=-3)
    cert = na_norm(ABC, u)
    bad = NormCertificate.from_json(cert.to_json())
    bad.witness[0] = PlanEntry(bad.witness[0].source, bad.witness[0].target, F(7))
    r = verify_certificate(bad, ABC, u)
    assert not r["ok"] and not (r["feasible"] and r["witness_cost"])
    low = NormCertificate.from_json(cert.to_json())
    low.value = Cost(1)
    r = verify_certificate(low, ABC, u)
    assert not r["cut_bound"] and not r["ok"]


def _random_decomposition(rng, u, labels, extra):
    field = u.field
    pool = list(labels) + extra
    terms = []
    for _ in range(rng.randint(1, 6)):
        x, y = rng.sample(pool, 2)
        terms.append((random_coeff(rng, field), x, y))
    rest = u - evaluate(terms, field)
    return terms + decompose(rest)


@pytest.mark.parametrize("field", NA_FIELDS, ids=lambda f: f.describe())
def test_reduction_engine(field):
    rng = random.Random(7)
    for inst in make_instances(field, 60, points=6, seed0=1300):
        u = inst.vector
        if u.is_zero:
            continue
        ext = extend_with_zero(inst.space, inst.basepoint)
        dec = _random_decomposition(rng, u, inst.space.points, [ZERO])
        red = reduce_decomposition(dec, ext, u)
        assert evaluate(red.terms, field) == u
        support = set(support_info(u).support)
        assert all(x in support and y in support for _, x, y in red.terms)
        assert decomposition_cost(red.terms, ext, field) <= decomposition_cost(dec, ext, field)


def test_reduction_rule_examples():
    sp = validate_ultrametric("xyz", [[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    u = vec(TRIV, x=1, y=-1)
    red = reduce_decomposition([(F(1), "x", "z"), (F(1), "z", "y")], sp, u)
    assert red.terms == [(F(1), "x", "y")]
    red = reduce_decomposition([(F(0), "x", "y"), (F(1), "x", "y")], sp, u)
    assert red.trace[0]["rule"] == "1"
    w = vec(Q2, x=2, y=-2)
    dec = [(F(2), "x", "z"), (F(4), "z", "y"), (F(2), "y", "z")]
    red = reduce_decomposition(dec, sp, w)
    assert evaluate(red.terms, Q2) == w
    assert decomposition_cost(red.terms, sp, Q2) <= decomposition_cost(dec, sp, Q2)


@pytest.mark.parametrize("field", [TRIV, Q2, FieldSpec("p-adic", p=3)], ids=lambda f: f.describe())
def test_subgroup_reduction(field):
    rng = random.Random(3)
    integer = lambda c: c.denominator == 1
    for inst in make_instances(field, 40, points=5, seed0=1700):
        u = normalize([(x, F(rng.randint(-4, 4))) for x in inst.vector.points], field)
        if u.is_zero:
            continue
        ext = extend_with_zero(inst.space, inst.basepoint)
        terms = [(F(rng.randint(-6, 6), rng.choice([2, 3, 6])), *rng.sample(list(ext.points), 2))
                 for _ in range(4)]
        dec = terms + decompose(u - evaluate(terms, field))
        red = reduce_to_subgroup(dec, ext, u, integer)
        assert evaluate(red.terms, field) == u
        assert all(integer(s) for s, _, _ in red.terms)
        assert decomposition_cost(red.terms, ext, field) <= decomposition_cost(dec, ext, field)


def test_kernel_characterisation():
    rng = random.Random(11)
    zero_seen = nonzero_seen = 0
    for inst in make_instances(TRIV, 80, points=5, seed0=2100, pseudometric=True):
        sp = inst.space
        pts = list(sp.points)
        pairs = [(x, y) for x in pts for y in pts if x < y and sp.d(x, y) == 0]
        if pairs and rng.random() < 0.6:
            raw = []
            for x, y in rng.sample(pairs, min(2, len(pairs))):
                c = F(rng.randint(1, 5))
                raw += [(x, c), (y, -c)]
            u = normalize(raw, TRIV)
        else:
            u = inst.vector
        ext = extend_with_zero(sp, pts[0])
        zero = na_norm(sp, u, basepoint=pts[0]).value.is_zero
        pres = zero_distance_presentation(ext, u)
        assert zero == (pres is not None)
        if pres is not None:
            assert evaluate(pres, TRIV) == u and all(ext.d(x, y) == 0 for _, x, y in pres)
        zero_seen += zero
        nonzero_seen += not zero
    assert zero_seen and nonzero_seen


def test_pointed_norm():
    sp = validate_ultrametric("xe", [[0, 3], [3, 0]])
    assert na_norm_pointed(sp, vec(Q2, x=1, e=-1)).value == Cost(3)
    u = vec(Q2, a=1, b=2, c=-3)
    assert na_norm_pointed(ABC, u).value == na_norm(ABC, u).value
    assert na_norm_pointed(ABC, normalize([], Q2)).value.is_zero
    with pytest.raises(ValueError):
        na_norm_pointed(ABC, vec(Q2, a=1))


def test_seminorm_family():
    u = vec(Q2, a=1, b=2, c=-3)
    assert len(seminorm_family([ABC], u)) == 1
    doubled = seminorm_family([ABC, ABC.scaled(2)], u)
    assert doubled[1].value == doubled[0].value.scale(2)
    # changing distances to a point outside the support leaves the norm alone
    big = validate_ultrametric("abcz", [[0, 1, 2, 5], [1, 0, 2, 5], [2, 2, 0, 5], [5, 5, 5, 0]])
    big2 = validate_ultrametric("abcz", [[0, 1, 2, 9], [1, 0, 2, 9], [2, 2, 0, 9], [9, 9, 9, 0]])
    a, b = seminorm_family([big, big2], u)
    assert a.value == b.value == na_norm(ABC, u).value


def test_basepoint_warning_and_zero_distances():
    from natp.na_norm import BasepointWarning
    import warnings
    sp = validate_ultrametric("ab", [[0, 3], [3, 0]])
    u = vec(Q2, a=1, b=1)
    with warnings.catch_warnings():
        warnings.simplefilter("error", BasepointWarning)
        with pytest.raises(BasepointWarning):
            na_norm(sp, u)
        na_norm(sp, u, basepoint="a")
    cert = na_norm(sp, u, zero_distances=[3, 3])
    assert cert.extension["mode"] == "zero_distances"
    assert verify_certificate(cert, sp, u)["ok"]


def test_prepare_support_order():
    sub, labels, coeffs, _ = prepare_support(ABC, vec(Q2, c=1, a=1), "a")
    assert labels == ["a", "c", ZERO] and coeffs[-1] == F(-2)
