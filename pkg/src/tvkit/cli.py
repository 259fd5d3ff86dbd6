"""Command-line interface: ``tvkit <command> [options]``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .besov import certified_modulus_constant, fit_smoothness
from .bounds import MCConfig, delta3_exact_with_error, measured_noise_modulus, theorem1_bound, theorem2_check
from .errors import InputError, NumericFailure
from .experiments import SUITES, _provenance, run_suite
from .funcspace import MultiPoly, Polynomial, parse_multipoly, parse_polynomial, parse_trig
from .measures import PushforwardDensity, parse_density
from .quadrature import integrate_value_space
from .report import write_run
from .tvmetrics import (
    gaussian_multipoly_sampler,
    l1_distance_with_error,
    modulus_curve,
    pushforward_sampler,
    tv_histogram_mc,
    tv_pushforward,
)


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_map(text: str):
    """Trigonometric if the text contains ``=``, multivariate if it contains ``:``, else a polynomial."""
    if "=" in text:
        return parse_trig(text)
    if ":" in text:
        return parse_multipoly(text)
    return parse_polynomial(text)


def _number(tok: str, flag: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise InputError(f"{flag}: cannot parse number {tok!r}") from None
    if not math.isfinite(v):
        raise InputError(f"{flag}: {tok!r} is not finite")
    return v


def parse_grid(text: str, flag: str, geometric: bool = True) -> np.ndarray:
    """``lo:hi:points``; a single number gives a one-point grid."""
    parts = text.split(":")
    if len(parts) == 1:
        return np.array([_number(parts[0], flag)])
    if len(parts) != 3:
        raise InputError(f"{flag}: expected lo:hi:points, got {text!r}")
    lo, hi = _number(parts[0], flag), _number(parts[1], flag)
    try:
        n = int(parts[2])
    except ValueError:
        raise InputError(f"{flag}: point count {parts[2]!r} is not an integer") from None
    if n < 1:
        raise InputError(f"{flag}: point count {parts[2]!r} must be positive")
    if not lo <= hi:
        raise InputError(f"{flag}: need lo <= hi in {text!r}")
    if geometric:
        if lo <= 0:
            raise InputError(f"{flag}: geometric grid needs lo > 0, got {parts[0]!r}")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def _window(text: Optional[str]):
    if text is None:
        return (0.0, math.inf)
    parts = text.split(":")
    if len(parts) != 2:
        raise InputError(f"--window: expected lo:hi, got {text!r}")
    return (_number(parts[0], "--window"), _number(parts[1], "--window"))


def _one_d(f, flag: str):
    if isinstance(f, MultiPoly):
        raise InputError(f"{flag}: this command needs a univariate map")
    return f


def _need_poly(f, flag: str) -> Polynomial:
    if not isinstance(f, Polynomial):
        raise InputError(f"{flag}: this command needs a univariate polynomial")
    return f


# ---------------------------------------------------------------------------
# commands; each returns (report, rows, series)


def cmd_pushforward(args):
    f = _one_d(parse_map(args.f), "--f")
    model = parse_density(args.density)
    q = PushforwardDensity(f, model)
    lo, hi = q.value_range
    t = parse_grid(args.t, "--t", geometric=False) if args.t else np.linspace(lo, hi, 201)
    vals = np.asarray(q(t), dtype=float).reshape(t.shape)
    crit = q.critical_values
    vals[np.isin(t, crit)] = math.inf
    total, err = integrate_value_space(q.evaluate_at, q.special_points(), args.tol)
    report = {
        "command": "pushforward",
        "map": f.describe(),
        "density": model.describe(),
        "value_range": [lo, hi],
        "critical_values": crit.tolist(),
        "pieces": [
            {"a": p.a, "b": p.b, "direction": p.direction, "shape": p.shape,
             "local_order_m": p.local_order_m, "local_constant_K": p.local_constant_K, "base": p.base}
            for p in q.pieces
        ],
        "integral": total,
        "integral_error": err,
        "model_mass": q.mass,
        "tol": args.tol,
    }
    rows = [{"t": a, "density": b} for a, b in zip(t.tolist(), vals.tolist())]
    series = {"density": [(a, b) for a, b in zip(t.tolist(), vals.tolist()) if math.isfinite(b)]}
    return report, rows, series


def cmd_tv(args):
    f, g = parse_map(args.f), parse_map(args.g)
    model = parse_density(args.density)
    report = {"command": "tv", "f": f.describe(), "g": g.describe(), "density": model.describe()}
    rows = []
    if isinstance(f, MultiPoly) or isinstance(g, MultiPoly):
        if not (isinstance(f, MultiPoly) and isinstance(g, MultiPoly)) or f.dim != g.dim:
            raise InputError("--f/--g: multivariate maps must share the same dimension")
        n = args.mc_samples or 1_000_000
        r = tv_histogram_mc(gaussian_multipoly_sampler(f), gaussian_multipoly_sampler(g), n, args.bins, seed=args.seed)
        rows.append({"method": r.method, "tv": r.value, "error_estimate": r.error_estimate})
        l1, l1_err = l1_distance_with_error(f, g, None, tol=args.tol, mc_samples=n, seed=args.seed)
    else:
        r = tv_pushforward(f, g, model, args.tol)
        rows.append({"method": r.method, "tv": r.value, "error_estimate": r.error_estimate})
        if args.mc_samples:
            m = tv_histogram_mc(pushforward_sampler(f, model), pushforward_sampler(g, model),
                                args.mc_samples, args.bins, seed=args.seed)
            rows.append({"method": m.method, "tv": m.value, "error_estimate": m.error_estimate})
        l1 = l1_err = None
        if isinstance(f, Polynomial) and isinstance(g, Polynomial) and model.kind == "gaussian":
            l1, l1_err = l1_distance_with_error(f, g, model, tol=args.tol)
    report.update({"results": rows, "l1": l1, "l1_error": l1_err, "seed": args.seed, "tol": args.tol})
    return report, rows, {}


def cmd_modulus(args):
    f = _one_d(parse_map(args.f), "--f")
    model = parse_density(args.density)
    u = parse_grid(args.u, "--u")
    curve = modulus_curve(f, model, u, args.tol)
    rows = [{"u": a, "delta": b, "error_estimate": c} for a, b, c in curve.rows()]
    fit = None
    try:
        est = fit_smoothness(curve, _window(args.window))
        fit = {"alpha": est.alpha, "alpha_stderr": est.alpha_stderr, "C": est.constant_C,
               "rms_residual": est.residual, "points": est.n_points}
    except InputError as exc:
        if args.window is not None:
            raise
        fit = {"skipped": str(exc)}
    report = {"command": "modulus", "map": f.describe(), "density": model.describe(),
              "saturation": curve.saturation, "fit": fit, "tol": args.tol, "points": rows}
    return report, rows, {"delta": list(zip(curve.u_grid.tolist(), curve.delta_values.tolist()))}


def cmd_certify(args):
    f = _need_poly(parse_map(args.f), "--f")
    model = parse_density(args.density)
    cert = certified_modulus_constant(f, model, args.tail_tol)
    u = parse_grid(args.u, "--u")
    curve = modulus_curve(f, model, u, args.tol)
    bound = cert.total * u**cert.alpha
    rows = [{"u": a, "delta": b, "bound": c} for a, b, c in zip(u.tolist(), curve.delta_values.tolist(), bound.tolist())]
    report = {"command": "certify", "certificate": cert.to_dict(),
              "dominates": bool(np.all(curve.delta_values <= bound + 1e-9)), "tol": args.tol}
    series = {"delta": list(zip(u.tolist(), curve.delta_values.tolist())), "bound": list(zip(u.tolist(), bound.tolist()))}
    return report, rows, series


def cmd_bound(args):
    f, g = parse_map(args.f), parse_map(args.g)
    model = parse_density(args.density)
    if isinstance(f, MultiPoly) or isinstance(g, MultiPoly):
        if not (isinstance(f, MultiPoly) and isinstance(g, MultiPoly)):
            raise InputError("--f/--g: both maps must be multivariate")
        r = theorem2_check(f, g, MCConfig(args.mc_samples or 1_000_000, args.bins, args.seed))
        row = {"measured_tv": r.measured_tv, "tv_error": r.tv_error, "l1": r.l1,
               "rate_point": r.rate_point, "method": r.method}
        return {"command": "bound", "f": f.describe(), "g": g.describe(), "rate": row}, [row], {}
    f, g = _need_poly(f, "--f"), _need_poly(g, "--g")
    if model.kind != "gaussian":
        raise InputError("--density: the bound needs a Gaussian density")
    cf = cg = None
    if args.cf is None or args.alpha is None:
        cf = certified_modulus_constant(f, model)
    if args.cg is None or args.alpha is None:
        cg = certified_modulus_constant(g, model)
    C_f = args.cf if args.cf is not None else cf.total
    C_g = args.cg if args.cg is not None else cg.total
    alpha = args.alpha if args.alpha is not None else min(cf.alpha, cg.alpha)
    l1, l1_err = l1_distance_with_error(f, g, model, tol=args.tol)
    b = theorem1_bound(C_f, C_g, alpha, l1)
    tv = tv_pushforward(f, g, model, args.tol)
    measured = None
    if not b.degenerate:
        d1 = measured_noise_modulus(f, model, b.sigma_opt)
        d2 = measured_noise_modulus(g, model, b.sigma_opt)
        d3 = delta3_exact_with_error(f, g, model, b.sigma_opt, args.tol)
        measured = {"delta1": d1[0], "delta2": d2[0], "delta3": d3[0], "sum": d1[0] + d2[0] + d3[0],
                    "sum_error": d1[1] + d2[1] + d3[1]}
    report = {"command": "bound", "f": f.describe(), "g": g.describe(), "density": model.describe(),
              "bound": b.to_dict(), "l1_error": l1_err, "tv": tv.value, "tv_error": tv.error_estimate,
              "measured_deltas": measured, "tv_le_bound": tv.value <= b.clamped_bound + tv.error_estimate,
              "tol": args.tol}
    row = {"alpha": alpha, "C_f": C_f, "C_g": C_g, "l1": l1, "sigma_opt": b.sigma_opt, "tv": tv.value,
           "raw_bound": b.raw_bound, "clamped_bound": b.clamped_bound}
    return report, [row], {}


def cmd_experiment(args):
    kw = {}
    name = args.suite
    if name == "gauss-poly":
        kw.update(m=args.m or 2, seed=args.seed, tol=args.tol)
        if args.deltas:
            kw["deltas"] = tuple(parse_grid(args.deltas, "--deltas"))
        if args.f:
            kw["f"] = _need_poly(parse_map(args.f), "--f")
    elif name == "trig-poly":
        kw.update(tol=args.tol)
        if args.f:
            f = parse_map(args.f)
            if not hasattr(f, "cos_coeffs"):
                raise InputError("--f: trig-poly needs a trigonometric spec such as 'cos=0,1;sin=0,0,0.5'")
            kw["f"] = f
        if args.u:
            kw["u_grid"] = tuple(parse_grid(args.u, "--u"))
        if args.window:
            kw["window"] = _window(args.window)
    elif name == "radial":
        kw.update(seed=args.seed, tol=args.tol)
        if args.mc_samples is not None:
            kw["mc_samples"] = args.mc_samples
        if args.u:
            kw["u_grid"] = tuple(parse_grid(args.u, "--u"))
        if args.cases:
            kw["cases"] = _cases(args.cases)
    elif name == "theorem1-audit":
        kw.update(seed=args.seed, tol=args.tol)
        if args.m:
            kw["ms"] = (args.m,)
        if args.deltas:
            kw["deltas"] = tuple(parse_grid(args.deltas, "--deltas"))
        if args.mc_samples is not None:
            kw["mc_samples"] = args.mc_samples
    elif name == "vandermonde":
        kw["n_max"] = args.n_max
    rep = run_suite(name, **kw)
    report = {"command": "experiment"}
    report.update(rep.to_dict())
    return report, rep.rows, rep.series


def _cases(text: str):
    out = []
    for tok in text.split(","):
        d, sep, m = tok.partition("x")
        try:
            out.append((int(d), int(m)))
        except ValueError:
            raise InputError(f"--cases: expected items like 2x1, got {tok!r}") from None
    return tuple(out)


COMMANDS = {
    "pushforward": cmd_pushforward,
    "tv": cmd_tv,
    "modulus": cmd_modulus,
    "certify": cmd_certify,
    "bound": cmd_bound,
    "experiment": cmd_experiment,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tvkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"tvkit {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--density", default="gauss", help="gauss[:mean,sigma] | lebesgue:a,b | restrict:a,b:<base> | chi:d")
    common.add_argument("--tol", type=float, default=1e-12, help="absolute quadrature tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--mc-samples", type=int, default=None)
    common.add_argument("--bins", type=int, default=None)
    common.add_argument("--out", default="runs", help="parent directory for run folders")
    common.add_argument("--format", choices=("json", "csv", "both"), default="both")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    def map_arg(sp, required=True):
        grp = sp.add_mutually_exclusive_group(required=required)
        grp.add_argument("--f", "--poly", dest="f", help="map: '0,0,1' (ascending), 'cos=..;sin=..', or 'c: e1 e2; ...'")
        grp.add_argument("--trig", dest="f", help="trigonometric map 'cos=a0,a1,..;sin=0,b1,..'")

    sp = add("pushforward", "density of f(X) on a grid")
    map_arg(sp)
    sp.add_argument("--t", help="lo:hi:points linear grid (default: value range, 201 points)")

    sp = add("tv", "total variation between f(X) and g(X)")
    sp.add_argument("--f", required=True)
    sp.add_argument("--g", required=True)

    sp = add("modulus", "shift modulus curve and power-law fit")
    map_arg(sp)
    sp.add_argument("--u", default="1e-4:1:30", help="lo:hi:points geometric grid")
    sp.add_argument("--window", help="lo:hi range of u used by the fit")

    sp = add("certify", "certified constant C with delta(u) <= C u^alpha")
    map_arg(sp)
    sp.add_argument("--tail-tol", type=float, default=1e-12)
    sp.add_argument("--u", default="1e-4:1:30")

    sp = add("bound", "coupling bound on TV from the L1 distance")
    sp.add_argument("--f", required=True)
    sp.add_argument("--g", required=True)
    sp.add_argument("--cf", type=float, help="override the certified constant of f")
    sp.add_argument("--cg", type=float, help="override the certified constant of g")
    sp.add_argument("--alpha", type=float, help="override the exponent")

    sp = add("experiment", "run a named experiment suite")
    sp.add_argument("suite", choices=sorted(SUITES))
    map_arg(sp, required=False)
    sp.add_argument("--m", type=int)
    sp.add_argument("--deltas", help="lo:hi:points geometric grid")
    sp.add_argument("--u", help="lo:hi:points geometric grid")
    sp.add_argument("--window")
    sp.add_argument("--cases", help="comma-separated dxm items, e.g. 1x2,2x2,3x1")
    sp.add_argument("--n-max", type=int, default=8)
    return p


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        if args.tol is not None and not args.tol > 0:
            raise InputError(f"--tol: must be positive, got {args.tol!r}")
        if args.mc_samples is not None and args.mc_samples < 0:
            raise InputError(f"--mc-samples: must be non-negative, got {args.mc_samples!r}")
        report, rows, series = COMMANDS[args.command](args)
        report.setdefault("provenance", {})
        report["provenance"].update(_provenance(argv=list(argv) if argv is not None else sys.argv[1:], seed=args.seed))
        timing = {"wall_clock_seconds": time.perf_counter() - t0}
        path = write_run(Path(args.out), args.command, report, rows, series, args.format, timing)
    except InputError as exc:
        print(f"tvkit: error: {exc}", file=stderr)
        return 2
    except NumericFailure as exc:
        print(f"tvkit: numerical failure: {exc}", file=stderr)
        return 3
    print(str(path), file=stdout)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
