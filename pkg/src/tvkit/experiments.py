"""Named experiment suites producing tabular reports and plot series."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .besov import certified_modulus_constant, fit_power_law, fit_smoothness
from .bounds import (
    delta3_exact_with_error,
    flattened_trig,
    max_flatness_order,
    measured_noise_modulus,
    theorem1_bound,
    trig_modulus_experiment,
    vandermonde_system_check,
)
from .errors import InputError
from .funcspace import Polynomial, TrigPolynomial
from .measures import DensityModel, PushforwardDensity, chi, standard_gaussian
from .tvmetrics import (
    l1_distance,
    modulus_curve,
    pushforward_sampler,
    tv_histogram_mc,
    tv_pushforward,
)


@dataclass
class ExperimentReport:
    name: str
    rows: List[dict] = field(default_factory=list)
    slopes: Dict[str, dict] = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    series: Dict[str, List[Tuple[float, float]]] = field(default_factory=dict)
    wall_clock: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        """JSON-ready content; wall-clock time is kept out for reproducibility."""
        return {
            "experiment": self.name,
            "checks": self.checks,
            "slopes": self.slopes,
            "rows": self.rows,
            "provenance": self.provenance,
        }


def _provenance(**extra) -> dict:
    import scipy

    out = {"tvkit": __version__, "numpy": np.__version__, "scipy": scipy.__version__}
    out.update(extra)
    return out


def _slope(x, y) -> dict:
    alpha, C, rms, stderr = fit_power_law(x, y)
    return {"slope": alpha, "stderr": stderr, "constant": C, "rms_residual": rms, "points": len(x)}


def monomial(m: int, shift: float = 0.0) -> Polynomial:
    c = np.zeros(m + 1)
    c[m] = 1.0
    c[0] = shift
    return Polynomial(c)


# ---------------------------------------------------------------------------


def gauss_poly(
    m: int = 2,
    deltas: Sequence[float] = tuple(np.geomspace(1e-4, 1e-1, 10)),
    f: Optional[Polynomial] = None,
    seed: int = 7,
    tol: float = 1e-12,
) -> ExperimentReport:
    """TV between f(X) and f(X) + delta for Gaussian X, with the certified bound."""
    t0 = time.perf_counter()
    model = standard_gaussian()
    f = f if f is not None else monomial(m)
    m = f.degree
    cert = certified_modulus_constant(f, model)
    rep = ExperimentReport("gauss-poly")
    tvs, ds = [], []
    for d in deltas:
        g = f + Polynomial([d])
        tv = tv_pushforward(f, g, model, tol)
        l1 = l1_distance(f, g, model)
        b = theorem1_bound(cert.total, cert.total, cert.alpha, l1)
        # linear perturbation, recorded for comparison with the constant one
        gl = f + Polynomial([0.0, d])
        tvl = tv_pushforward(f, gl, model, tol).value
        rep.rows.append({
            "delta": float(d), "tv": tv.value, "tv_error": tv.error_estimate, "l1": l1,
            "bound": b.clamped_bound, "slack": b.clamped_bound - tv.value,
            "tv_linear_perturbation": tvl,
        })
        tvs.append(tv.value)
        ds.append(float(d))
    s = _slope(ds, tvs)
    rep.slopes["log_tv_vs_log_delta"] = s
    rep.slopes["linear_perturbation"] = _slope(ds, [r["tv_linear_perturbation"] for r in rep.rows])
    lo, hi = 1.0 / (m + 1) - 0.05, 1.0 / m + 0.1
    rep.slopes["log_tv_vs_log_delta"].update({"expected_low": lo, "expected_high": hi})
    rep.checks["slope_in_sandwich"] = lo <= s["slope"] <= hi
    rep.checks["bound_dominates"] = all(r["slack"] >= -1e-9 for r in rep.rows)
    rep.series["tv"] = list(zip(ds, tvs))
    rep.series["bound"] = [(r["delta"], r["bound"]) for r in rep.rows]
    rep.provenance = _provenance(map=f.describe(), density=model.describe(), seed=seed, tol=tol,
                                 certified_alpha=cert.alpha, certified_C=cert.total)
    rep.wall_clock = time.perf_counter() - t0
    return rep


def trig_poly(
    f: Optional[TrigPolynomial] = None,
    u_grid: Sequence[float] = tuple(np.geomspace(1e-4, 1e-2, 16)),
    window: Tuple[float, float] = (1e-4, 1e-2),
    include_flattened: bool = True,
    tol: float = 1e-12,
) -> ExperimentReport:
    """Fitted modulus exponents of trigonometric polynomials under a Gaussian."""
    t0 = time.perf_counter()
    f = f if f is not None else TrigPolynomial([0.0, 1.0], [0.0, 0.0, 0.5])
    cases = [("given", f)]
    if include_flattened:
        cases.append(("flattened", flattened_trig(f.degree)))
    rep = ExperimentReport("trig-poly")
    for label, h in cases:
        n = h.degree
        curve = trig_modulus_experiment(h, standard_gaussian(), u_grid, tol)
        fit = fit_smoothness(curve, window)
        q = PushforwardDensity(h, standard_gaussian())
        kappa = max(b.m for b in q.branches) - 1
        rep.rows.append({
            "case": label, "map": h.describe(), "n": n, "fitted_alpha": fit.alpha, "alpha_stderr": fit.alpha_stderr,
            "fitted_C": fit.constant_C, "expected_min_alpha": 1.0 / (2 * n), "flatness_order": kappa,
            "flatness_limit": 2 * n - 1, "max_flatness_exact": max_flatness_order(n),
        })
        rep.checks[f"{label}_alpha_at_least_1/(2n)-0.05"] = fit.alpha >= 1.0 / (2 * n) - 0.05
        rep.checks[f"{label}_flatness_within_2n-1"] = kappa <= 2 * n - 1
        rep.series[label] = list(zip(curve.u_grid.tolist(), curve.delta_values.tolist()))
    rep.provenance = _provenance(density="gauss", window=list(window), tol=tol)
    rep.wall_clock = time.perf_counter() - t0
    return rep


def radial_power(d: int, m: int) -> Tuple[Polynomial, DensityModel]:
    """``|x|^m`` for standard Gaussian x in R^d, as a map of the radius."""
    return monomial(m), chi(d)


def radial(
    cases: Sequence[Tuple[int, int]] = ((1, 2), (2, 2), (3, 1)),
    u_grid: Sequence[float] = tuple(np.geomspace(1e-4, 1e-2, 12)),
    mc_samples: int = 1_000_000,
    seed: int = 0,
    mc_points: Sequence[float] = (1e-2, 1e-1),
    include_literal: bool = True,
    tol: float = 1e-12,
) -> ExperimentReport:
    """Modulus exponents of |x|^m under the d-dimensional standard Gaussian."""
    t0 = time.perf_counter()
    rep = ExperimentReport("radial")
    for d, m in cases:
        readings = [("norm_power", m)]
        if include_literal:
            readings.append(("squared_norm_power", 2 * m))
        for reading, power in readings:
            f, model = radial_power(d, power)
            curve = modulus_curve(f, model, u_grid, tol)
            fit = fit_smoothness(curve)
            expected = min(1.0, d / power)
            row = {
                "d": d, "m": m, "reading": reading, "power_of_norm": power, "fitted_alpha": fit.alpha,
                "alpha_stderr": fit.alpha_stderr, "expected_alpha": expected,
            }
            if reading == "norm_power":
                rep.checks[f"d={d},m={m}"] = abs(fit.alpha - expected) <= 0.1
                ss = np.random.SeedSequence([seed, d, m])
                for k, u in enumerate(mc_points):
                    sub = int(ss.generate_state(1)[0]) + k
                    quad = modulus_curve(f, model, [u], tol).delta_values[0]
                    mc = tv_histogram_mc(
                        _norm_power_sampler(d, power), _norm_power_sampler(d, power, u), mc_samples, seed=sub
                    )
                    row[f"quadrature_u={u:g}"] = float(quad)
                    row[f"mc_u={u:g}"] = mc.value
                    row[f"mc_error_u={u:g}"] = mc.error_estimate
                    rep.checks[f"d={d},m={m},u={u:g}_mc_agrees"] = bool(abs(quad - mc.value) <= 3 * mc.error_estimate)
            rep.rows.append(row)
            rep.series[f"{reading}_d{d}_m{m}"] = list(zip(curve.u_grid.tolist(), curve.delta_values.tolist()))
    rep.provenance = _provenance(seed=seed, mc_samples=mc_samples, tol=tol)
    rep.wall_clock = time.perf_counter() - t0
    return rep


def _norm_power_sampler(d: int, power: int, shift: float = 0.0):
    def sample(rng, n):
        x = rng.standard_normal((n, d))
        return np.linalg.norm(x, axis=1) ** power + shift

    return sample


def theorem1_audit(
    ms: Sequence[int] = (1, 2, 3),
    deltas: Sequence[float] = tuple(np.geomspace(1e-4, 1e-1, 7)),
    mc_samples: int = 1_000_000,
    seed: int = 0,
    extra_pairs: Sequence[Tuple[Polynomial, Polynomial]] = (),
    tol: float = 1e-12,
) -> ExperimentReport:
    """Chain TV <= delta1 + delta2 + delta3 <= min(2, C l1^(alpha/(alpha+1))) at the balancing sigma."""
    t0 = time.perf_counter()
    model = standard_gaussian()
    rep = ExperimentReport("theorem1-audit")
    pairs = [(monomial(m), monomial(m, float(d))) for m in ms for d in deltas] + list(extra_pairs)
    ss = np.random.SeedSequence(seed)
    seeds = ss.generate_state(len(pairs))
    cert_cache: Dict[tuple, object] = {}

    def cert(p: Polynomial):
        key = tuple(p.coeffs[1:].tolist())
        if key not in cert_cache:
            cert_cache[key] = certified_modulus_constant(p, model)
        return cert_cache[key]

    for (f, g), sd in zip(pairs, seeds):
        cf, cg = cert(f), cert(g)
        alpha = min(cf.alpha, cg.alpha)
        l1 = l1_distance(f, g, model)
        b = theorem1_bound(cf.total, cg.total, alpha, l1)
        tv = tv_pushforward(f, g, model, tol)
        row = {"f": f.describe(), "g": g.describe(), "alpha": alpha, "C_f": cf.total, "C_g": cg.total, "l1": l1,
               "sigma_opt": b.sigma_opt, "tv": tv.value, "tv_error": tv.error_estimate}
        if mc_samples:
            mc = tv_histogram_mc(pushforward_sampler(f, model), pushforward_sampler(g, model), mc_samples, seed=int(sd))
            row.update({"tv_mc": mc.value, "tv_mc_error": mc.error_estimate,
                        "mc_agrees": bool(abs(mc.value - tv.value) <= 3 * (mc.error_estimate + tv.error_estimate))})
        if b.degenerate:
            d1 = d2 = d3 = (0.0, 0.0)
        else:
            d1 = measured_noise_modulus(f, model, b.sigma_opt)
            d2 = measured_noise_modulus(g, model, b.sigma_opt)
            d3 = delta3_exact_with_error(f, g, model, b.sigma_opt)
        total = d1[0] + d2[0] + d3[0]
        err = d1[1] + d2[1] + d3[1] + tv.error_estimate
        row.update({
            "delta1": d1[0], "delta2": d2[0], "delta3": d3[0], "delta_sum": total, "delta_sum_error": err,
            "delta1_bound": b.delta1_bound, "delta2_bound": b.delta2_bound, "delta3_bound": b.delta3_bound,
            "raw_bound": b.raw_bound, "clamped_bound": b.clamped_bound,
            "tv_le_sum": tv.value <= total + err,
            "sum_le_raw": total <= b.raw_bound + err,
            "sum_le_clamped": total <= b.clamped_bound + err,
            "tv_le_clamped": tv.value <= b.clamped_bound + tv.error_estimate,
        })
        rep.rows.append(row)
    for key in ("tv_le_sum", "sum_le_raw", "sum_le_clamped", "tv_le_clamped", "mc_agrees"):
        vals = [r[key] for r in rep.rows if key in r]
        if vals:
            rep.checks[key] = bool(all(vals))
    rep.series["tv"] = [(r["l1"], r["tv"]) for r in rep.rows]
    rep.series["delta_sum"] = [(r["l1"], r["delta_sum"]) for r in rep.rows]
    rep.series["clamped_bound"] = [(r["l1"], r["clamped_bound"]) for r in rep.rows]
    rep.provenance = _provenance(seed=seed, mc_samples=mc_samples, tol=tol, density="gauss")
    rep.wall_clock = time.perf_counter() - t0
    return rep


def vandermonde(n_max: int = 8) -> ExperimentReport:
    t0 = time.perf_counter()
    rep = ExperimentReport("vandermonde")
    for n in range(1, n_max + 1):
        chk = vandermonde_system_check(n)
        row = chk.to_dict()
        row["dense_agrees"] = chk.Delta == chk.Delta_dense
        row["max_flatness_order"] = max_flatness_order(n)
        rep.rows.append(row)
        rep.series.setdefault("log10_Delta", []).append((n, math.log10(chk.Delta)))
    rep.checks["all_nonzero"] = all(r["nonzero"] for r in rep.rows)
    rep.checks["dense_agrees"] = all(r["dense_agrees"] for r in rep.rows)
    rep.checks["flatness_is_2n-1"] = all(r["max_flatness_order"] == 2 * r["n"] - 1 for r in rep.rows)
    rep.provenance = _provenance(n_max=n_max)
    rep.wall_clock = time.perf_counter() - t0
    return rep


SUITES: Dict[str, Callable[..., ExperimentReport]] = {
    "gauss-poly": gauss_poly,
    "trig-poly": trig_poly,
    "radial": radial,
    "theorem1-audit": theorem1_audit,
    "vandermonde": vandermonde,
}


def experiment_suites() -> Dict[str, Callable[..., ExperimentReport]]:
    return dict(SUITES)


def run_suite(name: str, **kwargs) -> ExperimentReport:
    try:
        fn = SUITES[name]
    except KeyError:
        raise InputError(f"unknown experiment suite {name!r}; choose from {sorted(SUITES)}") from None
    return fn(**kwargs)
