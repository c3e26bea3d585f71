"""``idlaws`` command line: JSON in, JSON or CSV out.

Exit status is 0 on success, 1 on an internal or numerical failure and 2
when the input lies outside the domain of the requested operation.
"""

import argparse
import datetime
import io
import json
import platform
import sys

import numpy as np
import scipy

from . import __version__
from .classes import DEFAULT_TOL, is_member, is_member_E_alpha
from .core import GeneratingTriplet, LevyMeasure, MixingMeasure
from .mappings import make_kernel, transform_triplet
from .numerics import DomainError, QuadratureError
from .qrep import Q_from_h, dom_classify, h_from_Q, integrand_from_dict, tail_identity_check, validate_Q
from .simulate import (DEFAULT_Z, ecf_compare, sample_integral, simulate_mapped_law,
                       write_csv)
from .verify import SUITES, run_suite

__all__ = ["main", "build_parser"]

MAPS = ("e_alpha", "phi", "psi", "m", "n_alpha")
NEEDS_ALPHA = ("e_alpha", "n_alpha")


class UsageError(Exception):
    """Bad or missing command-line input; reported with exit status 2."""


# --------------------------------------------------------------------------
# input / output
# --------------------------------------------------------------------------


def _load(source):
    """JSON from inline text, ``-`` (stdin) or a file path."""
    if source is None:
        raise UsageError("an input document is required")
    text = source
    if source == "-":
        text = sys.stdin.read()
    elif not source.lstrip().startswith(("{", "[")):
        try:
            with open(source) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {source}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"input is not valid JSON: {exc}") from None


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _provenance(args):
    return {
        "tool": "idlaws",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "command": args.command,
        "seed": args.seed,
        "tol": args.tol,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield [prefix, obj]


def _emit(args, result, table=None):
    """Write result to --out (or stdout); ``table`` is an optional (header, rows) CSV view."""
    meta = _provenance(args)
    if args.format == "csv":
        buf = io.StringIO()
        if table is None:
            table = (["key", "value"], list(_flatten(json.loads(json.dumps(result, default=_json_default)))))
        write_csv(buf, meta, *table)
        text = buf.getvalue()
    else:
        text = json.dumps({"metadata": meta, "result": result}, default=_json_default,
                          indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _unwrap(doc, key):
    """Accept the output document of another subcommand in place of a bare input."""
    if isinstance(doc, dict) and isinstance(doc.get("result"), dict) and key in doc["result"]:
        return doc["result"][key]
    return doc


def _triplet(doc):
    doc = _unwrap(doc, "triplet")
    if "levy" in doc or "gaussian" in doc or "gamma" in doc:
        return GeneratingTriplet.from_dict(doc)
    return GeneratingTriplet(levy=LevyMeasure.from_dict(int(doc.get("dim", 1)), doc))


def _kernel(args):
    name = args.map.lower()
    if name in NEEDS_ALPHA and args.alpha is None:
        raise UsageError(f"--map {name} needs --alpha")
    return make_kernel(name, args.alpha if name in NEEDS_ALPHA else None)


def _need_alpha(args):
    if args.alpha is None:
        raise UsageError(f"{args.command} needs --alpha")
    return args.alpha


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_transform(args):
    mu = _triplet(_load(args.input))
    out = transform_triplet(_kernel(args), mu)
    _emit(args, {"map": args.map, "alpha": args.alpha, "triplet": out.to_dict()})
    return 0


def cmd_check(args):
    nu = _triplet(_load(args.input)).levy
    tol = DEFAULT_TOL if args.tol is None else args.tol
    if args.cls == "E":
        verdict = is_member_E_alpha(nu, _need_alpha(args), tol=tol)
    else:
        verdict = is_member(args.cls, nu, tol=tol)
    _emit(args, verdict.to_dict())
    return 0


def cmd_hq(args):
    alpha = _need_alpha(args)
    Q = MixingMeasure.from_dict(_unwrap(_load(args.input), "Q"))
    mode = "bounded_variation" if args.mode == "bv" else "levy"
    v = validate_Q(Q, alpha, mode)
    if not v.ok:
        raise DomainError(f"mixing measure violates the {mode} integrability conditions: {v.to_dict()}")
    h = h_from_Q(Q, alpha, check=False)
    err = tail_identity_check(Q, h, alpha)
    result = {"alpha": alpha, "integrand": h.to_dict(), "validation": v.to_dict(),
              "tail_identity_max_rel_error": err}
    if args.tol is not None:
        result["tail_identity_passed"] = bool(err <= args.tol)
    _emit(args, result)
    return 0


def cmd_qfromh(args):
    alpha = _need_alpha(args)
    h = integrand_from_dict(_unwrap(_load(args.input), "integrand"))
    Q = Q_from_h(h, alpha)
    _emit(args, {"alpha": alpha, "Q": Q.to_dict()})
    return 0


def cmd_dom(args):
    alpha = _need_alpha(args)
    h = integrand_from_dict(_unwrap(_load(args.input), "integrand"))
    _emit(args, dom_classify(h, args.integrator, alpha).to_dict())
    return 0


def cmd_simulate(args):
    seed = args.seed = 0 if args.seed is None else args.seed
    z = np.asarray(args.z if args.z else DEFAULT_Z, dtype=float)
    report = None
    if args.kind == "integral":
        alpha = _need_alpha(args)
        h = integrand_from_dict(_unwrap(_load(args.input), "integrand"))
        s = sample_integral(h, args.integrator, alpha, n=args.n, seed=seed, workers=args.workers)
        x = s.values
        info = {"kind": "integral", "integrator": args.integrator, "alpha": alpha, "n": args.n,
                "horizon": s.horizon, "converged": s.converged, "verdict": s.verdict}
        if args.reference:
            report = ecf_compare(x, _triplet(_load(args.reference)), None, z)
    else:
        if args.map is None:
            raise UsageError("simulate --kind mapped needs --map")
        K = _kernel(args)
        mu = _triplet(_load(args.input))
        x = simulate_mapped_law(K, mu, args.n, seed, method=args.method, workers=args.workers)
        info = {"kind": "mapped", "map": args.map, "alpha": args.alpha, "method": args.method,
                "n": args.n}
        if args.ecf:
            report = ecf_compare(x, mu, K, z)
    x = np.asarray(x)
    if args.format == "csv":
        if report is not None:
            table = (report.header(), report.rows())
        else:
            cols = ["value"] if x.ndim == 1 else [f"x{k}" for k in range(x.shape[1])]
            rows = ([i, float(v)] if x.ndim == 1 else [i, *map(float, v)] for i, v in enumerate(x))
            table = (["replicate", *cols], rows)
        _emit(args, info, table)
        return 0
    result = dict(info)
    if report is not None:
        result["ecf"] = report.to_dict()
    else:
        result["samples"] = x.tolist()
    _emit(args, result)
    return 0


def cmd_verify(args):
    report = run_suite(args.suite, seed=args.seed, n=args.n, alpha=args.alpha, workers=args.workers)
    if args.format == "csv":
        rows = ([c["name"], c.get("value", ""), c.get("threshold", ""), c["passed"]]
                for c in report["checks"])
        _emit(args, report, (["check", "value", "threshold", "passed"], rows))
    else:
        _emit(args, report)
    return 0 if report["passed"] else 1


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="numerical tolerance")
    common.add_argument("--seed", type=int, default=None, help="random seed")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(prog="idlaws", description="Mappings of infinitely divisible laws.")
    p.add_argument("--version", action="version", version=f"idlaws {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("transform", parents=[common], help="map a generating triplet")
    s.add_argument("input", help="triplet JSON (path, inline or '-')")
    s.add_argument("--map", required=True, type=str.lower, choices=MAPS)
    s.add_argument("--alpha", type=float)
    s.set_defaults(func=cmd_transform)

    s = sub.add_parser("check", parents=[common], help="class membership of a Lévy measure")
    s.add_argument("input", help="triplet or Lévy measure JSON")
    s.add_argument("--class", dest="cls", required=True, type=str.upper, choices=("B", "L", "M", "T", "E"))
    s.add_argument("--alpha", type=float)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("hq", parents=[common], help="integrand h_Q from a mixing measure")
    s.add_argument("input", help="mixing measure JSON")
    s.add_argument("--alpha", type=float)
    s.add_argument("--mode", choices=("levy", "bv"), default="levy")
    s.set_defaults(func=cmd_hq)

    s = sub.add_parser("qfromh", parents=[common], help="mixing measure from an integrand")
    s.add_argument("input", help="integrand JSON")
    s.add_argument("--alpha", type=float)
    s.set_defaults(func=cmd_qfromh)

    s = sub.add_parser("dom", parents=[common], help="classify the integrability of an integrand")
    s.add_argument("input", help="integrand JSON")
    s.add_argument("--alpha", type=float)
    s.add_argument("--integrator", choices=("Y_alpha", "Z_alpha"), default="Z_alpha")
    s.set_defaults(func=cmd_dom)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo samples")
    s.add_argument("input", help="integrand JSON (kind integral) or triplet JSON (kind mapped)")
    s.add_argument("--kind", choices=("integral", "mapped"), default="mapped")
    s.add_argument("--map", type=str.lower, choices=MAPS)
    s.add_argument("--alpha", type=float)
    s.add_argument("--integrator", choices=("Y_alpha", "Z_alpha"), default="Y_alpha")
    s.add_argument("--method", choices=("direct", "reversed"), default="direct")
    s.add_argument("--n", type=int, default=10_000)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--z", type=float, nargs="+", help="z grid for the ECF report")
    s.add_argument("--ecf", action="store_true", help="report the ECF against the mapped law")
    s.add_argument("--reference", help="triplet JSON to compare an integral's ECF against")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("verify", parents=[common], help="run a verification battery")
    s.add_argument("--suite", required=True, choices=sorted(SUITES))
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--alpha", type=float)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DomainError) as exc:
        print(f"idlaws {args.command}: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, ValueError, TypeError, KeyError, ArithmeticError) as exc:
        print(f"idlaws {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
