import random
import warnings
from fractions import Fraction

import pytest

from natp import FieldSpec, normalize, parse_instance, random_dendrogram_instance
from natp.na_norm import BasepointWarning

NA_FIELDS = [
    FieldSpec("trivial"),
    FieldSpec("p-adic", p=2),
    FieldSpec("p-adic", p=3),
    FieldSpec("finite-field", p=5),
    FieldSpec("levi-civita"),
]


@pytest.fixture(autouse=True)
def _quiet_basepoint():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BasepointWarning)
        yield


def make_instances(field, count, points=4, scales=3, seed0=0, **kw):
    return [parse_instance(random_dendrogram_instance(points, scales, seed0 + s, field, **kw))
            for s in range(count)]


def random_coeff(rng: random.Random, field):
    from natp.instances import _random_coeff
    return _random_coeff(rng, field)


def random_vector(rng, field, labels, size=None):
    size = size or rng.randint(1, len(labels))
    pts = rng.sample(list(labels), size)
    return normalize([(x, random_coeff(rng, field)) for x in pts], field)


def F(x):
    return Fraction(x)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[str] = []


def record(number: int, title: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
                      + (f" ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
