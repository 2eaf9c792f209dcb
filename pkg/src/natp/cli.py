"""Command-line interface: JSON results on stdout, diagnostics on stderr.

Exit status is 0 on success, 1 for invalid input and 2 when a computed
certificate fails its own verification.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .appendix import ConvergenceError, appendix_example, complex_norm_small, gaussian_rational_demo
from .classical import kantorovich_real, transport_bipartite
from .group_norms import graev_norm, graev_threshold, tk_usp_compare
from .instances import Instance, InstanceError, load_instance, parse_instance, random_dendrogram_instance
from .na_norm import NormCertificate, na_norm, na_norm_bruteforce, verify_certificate
from .scalars import FieldError, FieldSpec, fmt_frac

EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2


class VerificationFailure(RuntimeError):
    pass


def _read(path: str) -> Instance:
    if path == "-":
        try:
            data = json.load(sys.stdin)
        except json.JSONDecodeError as exc:
            raise InstanceError([{"location": f"<stdin>:{exc.lineno}:{exc.colno}",
                                  "message": exc.msg}]) from None
        return parse_instance(data)
    return load_instance(path)


def _na_kwargs(inst: Instance, args) -> dict:
    bp = getattr(args, "basepoint", None) or inst.basepoint
    return {"basepoint": bp, "zero_distances": inst.zero_distances}


def solve_norm(inst: Instance, args) -> dict:
    cert = na_norm(inst.space, inst.vector, **_na_kwargs(inst, args))
    report = verify_certificate(cert, inst.space, inst.vector)
    if not report["ok"]:
        raise VerificationFailure(f"certificate self-check failed: {report}")
    return {"certificate": cert.to_json(), "verification": report}


def cmd_norm(args) -> dict:
    if args.batch:
        files = sorted(Path(args.batch).glob("*.json"))
        if args.parallel and len(files) > 1:
            with ProcessPoolExecutor() as pool:
                results = list(pool.map(_batch_one, [str(f) for f in files]))
        else:
            results = [_batch_one(str(f)) for f in files]
        return {"results": dict(zip((f.name for f in files), results))}
    return solve_norm(_read(args.instance), args)


def _batch_one(path: str) -> dict:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return solve_norm(load_instance(path), argparse.Namespace(basepoint=None))
    except (InstanceError, FieldError, KeyError, ValueError) as exc:
        return {"error": str(exc)}


def cmd_classical(args) -> dict:
    inst = _read(args.instance)
    if inst.field.kind == "complex":
        res = complex_norm_small(inst.vector, inst.space, tol=args.tol)
        return {
            "value": res.value,
            "plan": [{"from": a, "to": b, "coeff": [c.real, c.imag]} for a, b, c in res.plan],
            "iterations": res.iterations,
        }
    value, plan = kantorovich_real(inst.space, inst.vector)
    bip, _ = transport_bipartite(inst.space, inst.vector)
    if bip != value:
        raise VerificationFailure("democratic and bipartite optima differ")
    return {"value": fmt_frac(value), "approx": float(value), "plan": plan.to_json(),
            "bipartite_value": fmt_frac(bip)}


def cmd_oracle(args) -> dict:
    inst = _read(args.instance)
    kw = _na_kwargs(inst, args)
    cert = na_norm(inst.space, inst.vector, **kw)
    brute, plan = na_norm_bruteforce(inst.space, inst.vector, args.budget,
                                     return_plan=True, **kw)
    f = inst.field
    return {
        "budget": args.budget,
        "dendrogram_value": cert.value.to_json(),
        "bruteforce_value": brute.to_json(),
        "bruteforce_plan": [{"from": e.source, "to": e.target, "coeff": f.format(e.coeff)}
                            for e in plan],
        "equal": brute == cert.value,
    }


def cmd_graev(args) -> dict:
    inst = _read(args.instance)
    kw = _na_kwargs(inst, args)
    value = graev_norm(inst.space, inst.vector, **kw)
    out = {"value": fmt_frac(value), "approx": float(value),
           "threshold_check": graev_threshold(inst.space, inst.vector, **kw) == value}
    if args.compare:
        out["comparison"] = tk_usp_compare(inst.space, inst.vector, inst.field, **kw).to_json()
    return out


def cmd_certify(args) -> dict:
    inst = _read(args.instance)
    try:
        obj = json.loads(Path(args.certificate).read_text(encoding="utf-8"))
        cert = NormCertificate.from_json(obj.get("certificate", obj))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InstanceError([{"location": args.certificate, "message": str(exc)}]) from None
    if cert.field != inst.field:
        raise InstanceError([{"location": f"{args.certificate}:field",
                              "message": "certificate field differs from the instance"}])
    report = verify_certificate(cert, inst.space, inst.vector)
    if not report["ok"]:
        raise VerificationFailure(json.dumps(report))
    return report


def cmd_gen(args) -> dict:
    fs = FieldSpec(args.field, p=args.p) if args.p is not None else FieldSpec(args.field)
    return random_dendrogram_instance(args.points, args.scales, args.seed, fs)


def cmd_appendix(args) -> dict:
    out = appendix_example(tol=args.tol)
    out["gaussian_rationals"] = gaussian_rational_demo()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="natp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def with_instance(p, required=True):
        p.add_argument("--instance", required=required, help="instance JSON file, or - for stdin")
        p.add_argument("--basepoint", help="attach the zero point at this label")
        return p

    p = with_instance(sub.add_parser("norm", help="ultra-norm with certificate"), required=False)
    p.add_argument("--batch", metavar="DIR", help="solve every *.json in DIR")
    p.add_argument("--parallel", action="store_true", help="use worker processes with --batch")
    p.set_defaults(func=cmd_norm)

    p = with_instance(sub.add_parser("classical", help="real or complex Kantorovich norm"))
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_classical)

    p = with_instance(sub.add_parser("oracle", help="compare with the enumeration oracle"))
    p.add_argument("--budget", type=int, default=3)
    p.set_defaults(func=cmd_oracle)

    p = with_instance(sub.add_parser("graev", help="Graev norm of an integer vector"))
    p.add_argument("--compare", action="store_true", help="also compare with the field norm")
    p.set_defaults(func=cmd_graev)

    p = with_instance(sub.add_parser("certify", help="check a certificate"))
    p.add_argument("--certificate", required=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("gen", help="random ultrametric instance")
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--scales", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--field", default="p-adic")
    p.add_argument("--p", type=int, default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("appendix", help="complex-coefficient examples")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_appendix)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "gen" and args.field == "p-adic" and args.p is None:
        args.p = 2
    if args.command == "norm" and not (args.instance or args.batch):
        parser.error("norm needs --instance or --batch")
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result = args.func(args)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except InstanceError as exc:
        for e in exc.errors:
            print(f"error: {e['location']}: {e['message']}", file=sys.stderr)
        return EXIT_INPUT
    except (FieldError, KeyError, ValueError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    json.dump(result, sys.stdout, ensure_ascii=False, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
