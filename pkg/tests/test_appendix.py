import cmath
import math
import random
import time
from fractions import Fraction

import pytest

from natp import FieldSpec, normalize
from natp.appendix import (
    appendix_example, complex_norm_small, gaussian_rational_demo, support_restricted_complex_inf,
    weiszfeld,
)
from natp.classical import kantorovich_real, validate_metric

MU = cmath.exp(2j * math.pi / 3)
NU = cmath.exp(4j * math.pi / 3)
UNIT = validate_metric("pqr", [[0, 1, 1], [1, 0, 1], [1, 1, 0]])


def test_weiszfeld_examples():
    point, value = weiszfeld([0, MU, -NU], tol=1e-14)
    assert abs(value - math.sqrt(3)) < 1e-9
    assert weiszfeld([2 + 1j]) == (2 + 1j, 0.0)
    point, value = weiszfeld([0, 1, 2])
    assert abs(point - 1) < 1e-9 and abs(value - 2) < 1e-9


def test_weiszfeld_vertex_optimum():
    # a heavy vertex is itself the median; plain Weiszfeld would stall on it
    point, value = weiszfeld([0, 1, 1j], weights=[5, 1, 1])
    assert point == 0 and value == pytest.approx(2)


def test_support_restricted():
    u = {"p": 1, "q": MU, "r": NU}
    assert support_restricted_complex_inf(u, UNIT).value == pytest.approx(math.sqrt(3), abs=1e-6)
    assert support_restricted_complex_inf({"p": 1, "q": -1}, UNIT).value == pytest.approx(1)


def test_complex_full_examples():
    out = appendix_example()
    assert abs(out["support_restricted"] - math.sqrt(3)) < 1e-6
    assert abs(out["full"] - 1.5) < 1e-6
    assert out["full"] < out["support_restricted"]
    assert complex_norm_small({"p": 1, "q": -1}, UNIT).value == pytest.approx(1, abs=1e-6)


def test_complex_matches_real_solver():
    rng = random.Random(2)
    R = FieldSpec("real")
    for _ in range(20):
        n = rng.randint(2, 5)
        d = [[Fraction(0) if i == j else Fraction(rng.randint(2, 4)) for j in range(n)]
             for i in range(n)]
        for i in range(n):
            for j in range(i):
                d[i][j] = d[j][i]
        sp = validate_metric([f"x{i}" for i in range(n)], d)
        coeffs = [Fraction(rng.randint(-5, 5)) for _ in range(n - 1)]
        u = normalize(zip(sp.points, coeffs + [-sum(coeffs)]), R)
        exact, _ = kantorovich_real(sp, u)
        assert complex_norm_small(u, sp).value == pytest.approx(float(exact), abs=1e-6)


def test_gaussian_rational_sequence():
    demo = gaussian_rational_demo()
    assert demo["fermat_value"] == pytest.approx(math.sqrt(2 + math.sqrt(3)), abs=1e-12)
    assert demo["weiszfeld_value"] == pytest.approx(demo["fermat_value"], abs=1e-9)
    costs = [s["cost"] for s in demo["sequence"]]
    assert len(costs) >= 3 and all(a > b for a, b in zip(costs, costs[1:]))
    assert all(s["gap"] > 0 for s in demo["sequence"])


def test_appendix_runtime():
    start = time.perf_counter()
    appendix_example()
    assert time.perf_counter() - start < 1.0


def test_size_limit():
    big = validate_metric([str(i) for i in range(7)],
                          [[0 if i == j else 1 for j in range(7)] for i in range(7)])
    with pytest.raises(ValueError):
        complex_norm_small({"0": 1, "1": -1}, big)
