import random
from fractions import Fraction

import pytest

from conftest import make_instances
from natp import FieldError, FieldSpec, graev_norm, graev_threshold, na_norm_bruteforce, normalize
from natp import tk_usp_compare, validate_ultrametric
from natp.scalars import Cost

F = Fraction
TRIV = FieldSpec("trivial")
Q2 = FieldSpec("p-adic", p=2)
LC = FieldSpec("levi-civita")


def int_vector(rng, labels, field=TRIV):
    pts = rng.sample(labels, rng.randint(1, min(4, len(labels))))
    return normalize([(x, field.from_int(rng.choice([-3, -2, -1, 1, 2, 3]))) for x in pts], field)


def test_examples():
    sp = validate_ultrametric("xy", [[0, 3], [3, 0]])
    assert graev_norm(sp, normalize([("x", F(1)), ("y", F(-1))], TRIV)) == 3
    for n in range(6):
        u = normalize([("x", F(2**n)), ("y", F(-(2**n)))], Q2)
        assert graev_norm(sp, u) == 3
    eq = validate_ultrametric("abcd", [[0 if i == j else 5 for j in range(4)] for i in range(4)])
    rng = random.Random(1)
    for _ in range(30):
        u = int_vector(rng, list("abcd"))
        u = u - normalize([("d", u.balance())], TRIV)
        if not u.is_zero:
            assert graev_norm(eq, u) == 5
    with pytest.raises(FieldError):
        graev_norm(sp, normalize([("x", F(1, 2)), ("y", F(-1, 2))], TRIV))


def test_axioms_and_oracles():
    rng = random.Random(4)
    for inst in make_instances(TRIV, 60, points=5, seed0=3000):
        sp, labels = inst.space, list(inst.space.points)
        u, v = int_vector(rng, labels), int_vector(rng, labels)
        kw = {"basepoint": labels[0]}
        gu, gv = graev_norm(sp, u, **kw), graev_norm(sp, v, **kw)
        assert graev_norm(sp, u + v, **kw) <= max(gu, gv)
        assert graev_norm(sp, -u, **kw) == gu
        assert graev_threshold(sp, u, **kw) == gu
        x, y = rng.sample(labels, 2)
        assert graev_norm(sp, normalize([(x, F(1)), (y, F(-1))], TRIV)) == sp.d(x, y)


def test_bruteforce_integer_oracle():
    rng = random.Random(8)
    for inst in make_instances(TRIV, 40, points=4, seed0=3500):
        labels = list(inst.space.points)
        u = normalize([(x, F(rng.choice([-2, -1, 1, 2]))) for x in labels[:3]], TRIV)
        u = u - normalize([(labels[0], u.balance())], TRIV) if rng.random() < 0.5 else u
        if u.is_zero:
            continue
        kw = {"basepoint": labels[0]}
        g = graev_norm(inst.space, u, **kw)
        assert na_norm_bruteforce(inst.space, u, 2, **kw) == Cost(g)


@pytest.mark.parametrize("field", [TRIV, LC], ids=["trivial", "levi-civita"])
def test_trivial_on_rationals_equal(field):
    rng = random.Random(6)
    for inst in make_instances(TRIV, 50, points=5, seed0=4000):
        u = int_vector(rng, list(inst.space.points))
        rep = tk_usp_compare(inst.space, u, field, basepoint=inst.basepoint)
        assert rep.equal


def test_p_adic_gap():
    sp = validate_ultrametric("xy", [[0, 3], [3, 0]])
    prev = None
    for n in range(21):
        u = normalize([("x", F(2**n)), ("y", F(-(2**n)))], TRIV)
        rep = tk_usp_compare(sp, u, Q2)
        assert rep.field_norm == Cost(F(3, 2**n), 0, 2)
        assert rep.graev == 3
        assert rep.equal == (n == 0)
        if prev is not None:
            assert rep.field_norm < prev
        prev = rep.field_norm


def test_finite_field_rejected():
    sp = validate_ultrametric("xy", [[0, 1], [1, 0]])
    u = normalize([("x", F(1)), ("y", F(-1))], TRIV)
    with pytest.raises(FieldError):
        tk_usp_compare(sp, u, FieldSpec("finite-field", p=5))
