"""Instance files: parsing with located errors, serialization and generation."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path

from .classical import MetricSpace, validate_metric
from .scalars import FieldError, FieldSpec, fmt_frac, frac
from .ultrametric import ZERO, MetricError, UltraSpace, distances_from_merges, validate_ultrametric
from .vectors import FreeVector, normalize

__all__ = [
    "Instance",
    "InstanceError",
    "parse_instance",
    "load_instance",
    "instance_to_json",
    "random_dendrogram_instance",
]


class InstanceError(ValueError):
    """Invalid instance; ``errors`` holds ``{"location", "message"}`` records."""

    def __init__(self, errors: list[dict]):
        self.errors = errors
        first = errors[0]
        more = f" (+{len(errors) - 1} more)" if len(errors) > 1 else ""
        super().__init__(f"{first['location']}: {first['message']}{more}")


@dataclass
class Instance:
    field: FieldSpec
    space: UltraSpace | MetricSpace
    vector: FreeVector
    options: dict = dc_field(default_factory=dict)

    @property
    def basepoint(self) -> str | None:
        return self.options.get("basepoint")

    @property
    def zero_distances(self):
        return self.options.get("zero_distances")


def parse_instance(data: dict) -> Instance:
    """Validate an instance object; every problem found is reported."""
    errors: list[dict] = []

    def err(loc, msg):
        errors.append({"location": loc, "message": msg})

    if not isinstance(data, dict):
        raise InstanceError([{"location": "$", "message": "instance must be a JSON object"}])

    try:
        fs = FieldSpec.from_json(data.get("field"))
    except FieldError as exc:
        err("$.field", str(exc))
        fs = None

    points = data.get("points")
    if not isinstance(points, list) or not all(isinstance(p, str) for p in points):
        err("$.points", "points must be a list of strings")
        points = None
    else:
        for k, p in enumerate(points):
            if p == ZERO:
                err(f"$.points[{k}]", f"{ZERO!r} is a reserved label")
        if len(set(points)) != len(points):
            err("$.points", "duplicate point labels")
        if not points:
            err("$.points", "at least one point is required")

    space = None
    metric = data.get("metric")
    if points and not errors:
        space = _parse_metric(metric, points, fs, err)

    options = data.get("options") or {}
    if not isinstance(options, dict):
        err("$.options", "options must be an object")
        options = {}
    bp = options.get("basepoint")
    if bp is not None and points and bp not in points:
        err("$.options.basepoint", f"unknown point {bp!r}")
    zd = options.get("zero_distances")
    if zd is not None:
        if not isinstance(zd, list) or (points and len(zd) != len(points)):
            err("$.options.zero_distances", "needs one distance per point")
        else:
            try:
                zd = [frac(v) for v in zd]
            except (TypeError, ValueError, ZeroDivisionError) as exc:
                err("$.options.zero_distances", str(exc))

    vector = None
    raw = data.get("vector")
    if not isinstance(raw, list):
        err("$.vector", "vector must be a list of {point, coeff}")
    elif fs is not None and points:
        terms = []
        for k, item in enumerate(raw):
            loc = f"$.vector[{k}]"
            if not isinstance(item, dict) or "point" not in item or "coeff" not in item:
                err(loc, "expected an object with 'point' and 'coeff'")
                continue
            if item["point"] not in points:
                err(f"{loc}.point", f"unknown point {item['point']!r}")
                continue
            try:
                terms.append((item["point"], fs.parse(item["coeff"])))
            except (FieldError, TypeError, ValueError, ZeroDivisionError) as exc:
                err(f"{loc}.coeff", str(exc))
        if not errors:
            vector = normalize(terms, fs)

    if errors:
        raise InstanceError(errors)
    opts = {}
    if bp is not None:
        opts["basepoint"] = bp
    if zd is not None:
        opts["zero_distances"] = zd
    return Instance(fs, space, vector, opts)


def _parse_metric(metric, points, fs, err):
    if not isinstance(metric, dict) or "type" not in metric:
        err("$.metric", "metric must be an object with a 'type'")
        return None
    kind = metric["type"]
    try:
        if kind == "matrix":
            matrix = metric.get("values")
            if not isinstance(matrix, list):
                err("$.metric.values", "matrix values must be a list of rows")
                return None
            matrix = [[frac(v) for v in row] for row in matrix]
        elif kind == "dendrogram":
            merges = metric.get("merges")
            if not isinstance(merges, list):
                err("$.metric.merges", "dendrogram needs a list of merges")
                return None
            matrix = distances_from_merges(points, merges)
        else:
            err("$.metric.type", f"unknown metric type {kind!r}")
            return None
        if fs is not None and not fs.is_na:
            return validate_metric(points, matrix)
        return validate_ultrametric(points, matrix, bool(metric.get("pseudometric", False)))
    except MetricError as exc:
        err("$.metric", str(exc))
        for v in exc.violations[1:]:
            err("$.metric", f"also violated: {v}")
    except (TypeError, ValueError, ZeroDivisionError, KeyError) as exc:
        err("$.metric", f"bad metric entry: {exc}")
    return None


def load_instance(path: str | Path) -> Instance:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InstanceError([{"location": str(path), "message": str(exc)}]) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(
            [{"location": f"{path}:{exc.lineno}:{exc.colno}", "message": exc.msg}]
        ) from None
    return parse_instance(data)


def instance_to_json(fs: FieldSpec, space, u: FreeVector, options: dict | None = None) -> dict:
    out = {"field": fs.to_json()}
    out["field"].pop("note", None)
    out.update(space.to_json())
    if getattr(space, "pseudometric_allowed", False):
        out["metric"]["pseudometric"] = True
    out["vector"] = u.to_json()
    if options:
        opts = dict(options)
        if "zero_distances" in opts:
            opts["zero_distances"] = [fmt_frac(frac(v)) for v in opts["zero_distances"]]
        out["options"] = opts
    return out


# --------------------------------------------------------------------------
# generation


def _random_coeff(rng: random.Random, fs: FieldSpec):
    k = fs.kind
    if k == "finite-field":
        return rng.randrange(1, fs.p)
    if k == "levi-civita":
        n = rng.randint(1, 2)
        exps = rng.sample([Fraction(e, 2) for e in range(-2, 5)], n)
        return fs.parse([[e, rng.choice([-2, -1, 1, 3])] for e in exps])
    if k == "p-adic":
        num = rng.choice([-1, 1]) * rng.randint(1, 4) * fs.p ** rng.randint(0, 2)
        return Fraction(num, fs.p ** rng.randint(0, 1))
    return Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 1, 2]))


def random_dendrogram_instance(points: int, scales: int, seed: int,
                               field: FieldSpec | None = None, *,
                               pseudometric: bool = False, balanced: bool | None = None) -> dict:
    """Random ultrametric instance from a random merge tree.

    Merge heights come from ``scales`` distinct rationals; a merge always sits
    at least as high as the merges below it, so the result is an ultrametric.
    With ``pseudometric`` the scale 0 is also allowed.  Deterministic in ``seed``.
    """
    if points < 1 or scales < 1:
        raise ValueError("points and scales must be positive")
    rng = random.Random(seed)
    fs = field or FieldSpec("p-adic", p=2)
    levels = sorted(rng.sample(range(1, 6 * scales + 1), scales))
    heights = [Fraction(v, 2) for v in levels]
    if pseudometric:
        heights = [Fraction(0)] + heights
    labels = [f"x{i}" for i in range(points)]
    clusters = [(lab, -1) for lab in labels]  # (representative, level index of last merge)
    merges = []
    while len(clusters) > 1:
        k = rng.randint(2, min(3, len(clusters)))
        chosen = rng.sample(range(len(clusters)), k)
        floor = min(max(clusters[c][1] for c in chosen) + 1, len(heights) - 1)
        level = rng.randint(floor, len(heights) - 1)
        members = [clusters[c][0] for c in chosen]
        merges.append({"members": members, "height": fmt_frac(heights[level])})
        rest = [c for i, c in enumerate(clusters) if i not in chosen]
        clusters = rest + [(members[0], level)]
    matrix = distances_from_merges(labels, merges) if points > 1 else [[Fraction(0)]]
    space = validate_ultrametric(labels, matrix, pseudometric_allowed=True)
    size = rng.randint(1, points)
    chosen = sorted(rng.sample(labels, size), key=labels.index)
    terms = [(x, _random_coeff(rng, fs)) for x in chosen]
    if balanced is None:
        balanced = rng.random() < 0.5
    if balanced and len(terms) > 1:
        last, _ = terms[-1]
        terms[-1] = (last, fs.neg(fs.total(c for _, c in terms[:-1])))
    u = normalize(terms, fs)
    data = instance_to_json(fs, space, u, {"basepoint": labels[0]})
    data["metric"] = {"type": "dendrogram", "merges": merges}
    if pseudometric:
        data["metric"]["pseudometric"] = True
    return data
