"""Command-line front end.

Input files are JSON ``{"space": {"lambda": ..., "n": ...}, "body": {...}}``;
``--lambda`` replaces the space's curvature.  Body objects by ``type``:

* ``ball``: ``radius`` (geodesic), optional ``center``
* ``ellipsoid``: ``semiaxes``, optional ``rotation`` matrix
* ``quadric``: ``center`` and positive definite ``shape`` ``S``, the body ``(x-c)^T S^-1 (x-c) <= 1``
* ``polytope``: ``vertices``, or ``normals`` and ``offsets``
* ``smooth2d``: ``a0`` and ``terms`` ``[[k, a_k, b_k], ...]`` of the support expansion
* ``truncated``: a quadric ``base`` cut by ``normals`` and ``offsets``

Outputs are JSON reports with
``{"schema", "kind", "lambda", "n", "tolerances", "result", "timestamp"}``.

Exit codes: 0 success, 2 empty result, 3 numeric failure, 64 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import experiments as ex
from . import spaceform as sf
from ._numerics import QuadratureError, RootFindingError
from .bodies import BodyError, EmptyWulff, body_from_spec, direction_grid
from .capvolume import OutOfRange, floating_body
from .floatarea import floating_area

log = logging.getLogger("spaceform_float")

EXIT_OK = 0
EXIT_EMPTY = 2
EXIT_NUMERIC = 3
EXIT_USAGE = 64

THREADS_ENV = "SPACEFORM_FLOAT_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_delta_grid(text: str) -> list[float]:
    """``min:max:count`` to a geometric grid, largest first."""
    try:
        lo, hi, count = text.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected min:max:count, got {text!r}") from exc
    if not (0 < lo < hi) or count < 3:
        raise argparse.ArgumentTypeError("need 0 < min < max and count >= 3")
    return [float(d) for d in np.geomspace(hi, lo, count)]


def _positive_int(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=float, help="curvature; overrides the input file")
    common.add_argument("--delta", type=float, help="floating parameter")
    common.add_argument("--delta-grid", type=parse_delta_grid, help="geometric grid min:max:count")
    common.add_argument("--directions", type=_positive_int, help="direction grid size")
    common.add_argument("--resolution", type=_positive_int, help="boundary quadrature resolution")
    common.add_argument("--tol", type=float, help="tolerance override")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="JSON output path (default stdout)")
    common.add_argument("--csv", action="store_true", help="also write a CSV table next to --out")
    common.add_argument("--threads", type=_positive_int, help=f"worker cap (fallback ${THREADS_ENV})")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="spaceform-float", description="Floating bodies and floating areas in real space forms.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, needs_spec, help_ in [
        ("floatbody", True, "floating body depth profile"),
        ("floatarea", True, "floating area"),
        ("converge", True, "volume-loss quotients and their limit"),
        ("sandwich", False, "Euclidean sandwich inclusions"),
        ("valuation", False, "valuation identity on a split ball"),
        ("invariance", False, "invariance under motions and unimodular maps"),
        ("isoperimetric", False, "ellipse-family probe of the isoperimetric conjecture"),
        ("semicontinuity", False, "polygon approximations of a disk"),
        ("validate", False, "run the property suite"),
    ]:
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("spec", nargs=None if needs_spec else "?", help="input JSON file, '-' for stdin")
    return parser


def _threads(args) -> int:
    if args.threads:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise UsageError(f"{THREADS_ENV} must be an integer") from exc
        if value <= 0:
            raise UsageError(f"{THREADS_ENV} must be positive")
        return value
    return 1


def load_spec(path: str | None, lam_override: float | None):
    """Returns (lam, n, body_spec) with the body spec possibly None."""
    if path is None:
        return (0.0 if lam_override is None else lam_override), 2, None
    try:
        text = sys.stdin.read() if path == "-" else open(path).read()
        data = json.loads(text)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("body"), dict):
        raise UsageError("input must be an object with a 'body' object")
    space = data.get("space", {})
    if not isinstance(space, dict):
        raise UsageError("'space' must be an object")
    lam = float(space.get("lambda", 0.0)) if lam_override is None else lam_override
    n = int(space.get("n", 2))
    if n not in (2, 3):
        raise UsageError("only n = 2 and n = 3 are supported")
    return lam, n, data["body"]


def _config(args, lam, n, body) -> ex.ExperimentConfig:
    cfg = ex.ExperimentConfig(lam=lam, n=n, body=body, directions=args.directions, resolution=args.resolution,
                              tol=args.tol, seed=args.seed, out=args.out, csv=args.csv, threads=_threads(args))
    if args.delta_grid is not None:
        cfg.delta_grid = args.delta_grid
    if args.delta is not None:
        cfg.delta = args.delta
    return cfg


def _make_body(body, lam, n):
    if body is None:
        raise UsageError("this command needs a body spec")
    try:
        K = body_from_spec(body, lam, n)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"invalid body spec: {exc}") from exc
    K.check_in(sf.SpaceForm(lam, n))
    return K


def _write(args, payload, rows=None):
    if args.out:
        ex.write_report(args.out, payload, rows, args.csv)
    else:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")


def cmd_floatbody(args, lam, n, body) -> int:
    if args.delta is None:
        raise UsageError("floatbody needs --delta")
    K = _make_body(body, lam, n)
    V = direction_grid(n, args.directions)
    F = floating_body(K, args.delta, lam, directions=V)
    prof = F.profile
    # gap between the Wulff polytope and the traced envelope on a finer grid
    W = direction_grid(n, 2 * len(V)) if n == 2 else direction_grid(n, 4 * len(V))
    gap = float(np.max(F.body.support(W) - F.envelope.support(W)))
    result = {
        "delta": args.delta,
        "profile": [{"direction": v, "depth": d, "residual": r}
                    for v, d, r in zip(prof.directions.tolist(), prof.depths.tolist(), prof.residuals.tolist())],
        "support": prof.values.tolist(),
        "hausdorff_gap_estimate": max(gap, 0.0),
    }
    rows = [{"direction_" + str(i): v[i] for i in range(n)} | {"depth": d, "residual": r}
            for v, d, r in zip(prof.directions.tolist(), prof.depths.tolist(), prof.residuals.tolist())]
    _write(args, ex.envelope("floatbody", lam, n, {"cap_rtol": 1e-9, "directions": len(V)}, result), rows)
    return EXIT_OK


def cmd_floatarea(args, lam, n, body) -> int:
    K = _make_body(body, lam, n)
    res = floating_area(K, lam, resolution=args.resolution)
    result = {"value": res.value, "quadrature_error": res.quadrature_error}
    tol = {"resolution": args.resolution or (4096 if n == 2 else 20480)}
    _write(args, ex.envelope("floatarea", lam, n, tol, result))
    return EXIT_OK


def cmd_converge(args, lam, n, body) -> int:
    _make_body(body, lam, n)
    cfg = _config(args, lam, n, body)
    cfg.out = None
    report = ex.run_theorem1(cfg)
    rows = [{"delta": d, "quotient": q} for d, q in zip(report.delta_grid, report.quotients)]
    tol = {"relative_error": args.tol if args.tol is not None else 1e-2}
    _write(args, ex.envelope("theorem1", lam, n, tol, report.to_dict()), rows)
    return EXIT_OK


def _experiment(kind, runner):
    def cmd(args, lam, n, body) -> int:
        cfg = _config(args, lam, n, body)
        cfg.out = None
        result = runner(cfg)
        payload = result.to_dict() if hasattr(result, "to_dict") else result
        _write(args, ex.envelope(kind, lam, n, {"tol": args.tol}, payload))
        return EXIT_OK if payload.get("passed", True) else EXIT_NUMERIC
    return cmd


def cmd_isoperimetric(args, lam, n, body) -> int:
    cfg = _config(args, lam, n, body)
    cfg.out = None
    result = ex.run_isoperimetric_probe(cfg)
    rows = [{"ratio": r, "omega": o} for r, o in zip(result.ratios, result.omegas)]
    _write(args, ex.envelope("isoperimetric", lam, n, {"search": 1e-3}, result.to_dict()), rows)
    return EXIT_OK


def run_validation(directions: int = 512, threads: int = 1) -> dict:
    """Property suite: sandwich, valuation, invariance, semicontinuity, flat lam = 0 probe."""
    checks = {}
    checks["sandwich"] = ex.run_sandwich(ex.ExperimentConfig(directions=directions))["passed"]
    for lam in (-1.0, 0.0, 1.0):
        checks[f"valuation[{lam:g}]"] = ex.run_valuation(ex.ExperimentConfig(lam=lam))["passed"]
        checks[f"invariance[{lam:g}]"] = ex.run_invariance(ex.ExperimentConfig(lam=lam))["passed"]
        checks[f"semicontinuity[{lam:g}]"] = ex.run_semicontinuity_probe(ex.ExperimentConfig(lam=lam))["passed"]
    probe = ex.run_isoperimetric_probe(ex.ExperimentConfig(lam=0.0, threads=threads))
    checks["isoperimetric_flat[0]"] = probe.flat
    return {"checks": checks, "passed": all(checks.values())}


def cmd_validate(args, lam, n, body) -> int:
    report = run_validation(args.directions or 512, _threads(args))
    _write(args, ex.envelope("validate", lam, n, {"slack": 1e-9, "motion": 1e-3, "affine": 1e-6}, report))
    return EXIT_OK if report["passed"] else EXIT_NUMERIC


COMMANDS = {
    "floatbody": cmd_floatbody,
    "floatarea": cmd_floatarea,
    "converge": cmd_converge,
    "sandwich": _experiment("sandwich", ex.run_sandwich),
    "valuation": _experiment("valuation", ex.run_valuation),
    "invariance": _experiment("invariance", ex.run_invariance),
    "isoperimetric": cmd_isoperimetric,
    "semicontinuity": _experiment("semicontinuity", ex.run_semicontinuity_probe),
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        lam, n, body = load_spec(args.spec, args.lam)
        return COMMANDS[args.command](args, lam, n, body)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EmptyWulff, OutOfRange) as exc:
        print(f"EmptyWulff: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (QuadratureError, RootFindingError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (sf.DomainError, BodyError, ValueError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
