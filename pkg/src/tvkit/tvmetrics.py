"""Total-variation distances, shift moduli, L1 distances and a Monte Carlo oracle.

Total variation follows the ``integral of |density difference|`` convention, so
two probability laws are at distance at most 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from .errors import InputError
from .funcspace import Map1D, MultiPoly, Polynomial, real_roots
from .measures import DensityModel, PushforwardDensity, standard_gaussian
from .quadrature import integrate_breakpoints, integrate_value_space

Sampler = Callable[[np.random.Generator, int], np.ndarray]

MC_BATCH = 1 << 18
PILOT_SAMPLES = 1 << 16


@dataclass(frozen=True)
class TVResult:
    value: float
    method: str
    error_estimate: float

    def __post_init__(self):
        if self.method not in ("quadrature", "exact_gaussian", "monte_carlo"):
            raise InputError(f"unknown TV method {self.method!r}")


@dataclass(frozen=True)
class ModulusCurve:
    """Samples ``(u, delta(u))`` of the value-shift modulus of a pushforward."""

    u_grid: np.ndarray
    delta_values: np.ndarray
    map_description: str
    model_description: str
    mass: float = 1.0
    error_estimates: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        u = np.asarray(self.u_grid, dtype=float)
        d = np.asarray(self.delta_values, dtype=float)
        if u.shape != d.shape:
            raise InputError("u_grid and delta_values must have the same length")
        object.__setattr__(self, "u_grid", u)
        object.__setattr__(self, "delta_values", d)

    @property
    def saturation(self) -> float:
        return 2.0 * self.mass

    def rows(self):
        errs = self.error_estimates if self.error_estimates is not None else np.zeros_like(self.u_grid)
        return list(zip(self.u_grid.tolist(), self.delta_values.tolist(), np.asarray(errs).tolist()))


# ---------------------------------------------------------------------------
# quadrature-based distances


def tv_quadrature(q1: PushforwardDensity, q2: PushforwardDensity, tol: float = 1e-12) -> TVResult:
    """``integral |q1 - q2|`` with breakpoints at the special values of both densities."""

    def integrand(c0, shift, off):
        return np.abs(q1.evaluate_at(c0, shift, off) - q2.evaluate_at(c0, shift, off))

    pts = q1.special_points() + q2.special_points()
    value, err = integrate_value_space(integrand, pts, tol)
    err += q1.source.truncation_mass + q2.source.truncation_mass
    return TVResult(value, "quadrature", err)


def tv_pushforward(f: Map1D, g: Map1D, model: DensityModel, tol: float = 1e-12) -> TVResult:
    """TV between the laws of f(X) and g(X) for X with density ``model``."""
    return tv_quadrature(PushforwardDensity(f, model), PushforwardDensity(g, model), tol)


def tv_gaussian_same_variance(mu1: float, mu2: float, sigma: float) -> float:
    """Exact TV between N(mu1, sigma^2) and N(mu2, sigma^2)."""
    if not sigma > 0:
        raise InputError("sigma must be positive")
    z = abs(mu1 - mu2) / (2.0 * sigma)
    # 2(2 Phi(z) - 1) = 2 erf(z / sqrt 2), accurate for small z
    return float(2.0 * special.erf(z / math.sqrt(2.0)))


def shift_modulus_result(
    f: Map1D, model: DensityModel, u: float, tol: float = 1e-12, base: Optional[PushforwardDensity] = None
) -> TVResult:
    if u < 0:
        raise InputError("shift u must be non-negative")
    q = base if base is not None else PushforwardDensity(f, model)
    if u == 0:
        return TVResult(0.0, "quadrature", 0.0)
    return tv_quadrature(q, q.shifted(u), tol)


def shift_modulus(f: Map1D, model: DensityModel, u: float, tol: float = 1e-12) -> float:
    """TV between the law of f(X) and the law of f(X) + u."""
    return shift_modulus_result(f, model, u, tol).value


def shift_modulus_argument(f: Polynomial, model: DensityModel, u: float, tol: float = 1e-12) -> float:
    """TV between the laws of f(X) and f(X - u); differs from ``shift_modulus`` in general."""
    if u < 0:
        raise InputError("shift u must be non-negative")
    if not isinstance(f, Polynomial):
        raise InputError("argument shift is implemented for polynomials only")
    return tv_pushforward(f, f.shift_argument(u), model, tol).value


def modulus_curve(f: Map1D, model: DensityModel, u_grid: Sequence[float], tol: float = 1e-12) -> ModulusCurve:
    u = np.asarray(u_grid, dtype=float)
    q = PushforwardDensity(f, model)
    vals, errs = [], []
    for ui in u:
        r = shift_modulus_result(f, model, float(ui), tol, base=q)
        vals.append(r.value)
        errs.append(r.error_estimate)
    return ModulusCurve(u, np.array(vals), f.describe(), model.describe(), q.mass, np.array(errs))


def geometric_grid(lo: float, hi: float, points: int) -> np.ndarray:
    if not (0 < lo < hi) or points < 2:
        raise InputError("geometric grid needs 0 < lo < hi and at least 2 points")
    return np.geomspace(lo, hi, int(points))


# ---------------------------------------------------------------------------
# L1 distances


def _gauss_moments(a: float, b: float, kmax: int) -> np.ndarray:
    """``integral_a^b z^k phi(z) dz`` for k = 0..kmax (a, b may be infinite)."""
    def edge(x, k):
        if not math.isfinite(x):
            return 0.0
        return x ** (k - 1) * math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi) if k >= 1 else 0.0

    m = np.zeros(kmax + 1)
    m[0] = float(special.ndtr(b) - special.ndtr(a)) if b <= 0 else float(special.ndtr(-a) - special.ndtr(-b))
    if kmax >= 1:
        m[1] = edge(a, 1) - edge(b, 1)
    for k in range(2, kmax + 1):
        m[k] = edge(a, k) - edge(b, k) + (k - 1) * m[k - 2]
    return m


def _abs_gauss_integral(c: np.ndarray, lo: float, hi: float) -> float:
    """``integral_lo^hi |sum c_k z^k| phi(z) dz`` from exact incomplete moments."""
    p = Polynomial(c)
    if p.is_zero:
        return 0.0
    cuts = [lo]
    if p.degree >= 1:
        cuts += [r for r in real_roots(p, (lo, hi)) if lo < r < hi]
    cuts.append(hi)
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if not a < b:
            continue
        probe = 0.5 * (a + b) if math.isfinite(a) and math.isfinite(b) else (
            b - 1.0 if math.isfinite(b) else (a + 1.0 if math.isfinite(a) else 0.0)
        )
        s = 1.0 if p(probe) >= 0 else -1.0
        total += s * float(np.dot(p.coeffs, _gauss_moments(a, b, p.degree)))
    return max(total, 0.0)


def _gaussian_frame(model: DensityModel):
    """(mean, sigma, zlo, zhi) when the model is a (restricted) Gaussian."""
    if model.kind == "gaussian":
        mean, sigma = model.params
        return mean, sigma, -math.inf, math.inf
    if model.kind == "restricted":
        inner = _gaussian_frame(model.base)
        if inner is None:
            return None
        mean, sigma, zlo, zhi = inner
        a, b = model.params
        return mean, sigma, max(zlo, (a - mean) / sigma), min(zhi, (b - mean) / sigma)
    return None


def _l1_poly_1d(h: Polynomial, model: DensityModel, tol: float) -> Tuple[float, float]:
    if h.is_zero:
        return 0.0, 0.0
    frame = _gaussian_frame(model)
    if frame is not None:
        mean, sigma, zlo, zhi = frame
        if not zlo < zhi:
            return 0.0, 0.0
        c = h.taylor(mean) * sigma ** np.arange(h.degree + 1)
        return _abs_gauss_integral(c, zlo, zhi), 1e-15 * (1.0 + float(np.sum(np.abs(c))))
    lo, hi = model.effective_support
    pts = [lo, hi] + ([r for r in real_roots(h, (lo, hi))] if h.degree >= 1 else [])
    val, err = integrate_breakpoints(lambda x: np.abs(h(x)) * model.pdf(x), pts, tol)
    return val, err


def l1_distance_with_error(
    f: Union[Polynomial, MultiPoly],
    g: Union[Polynomial, MultiPoly],
    model: Optional[DensityModel] = None,
    *,
    tol: float = 1e-12,
    quad_order: int = 64,
    mc_samples: int = 1_000_000,
    seed: int = 0,
) -> Tuple[float, float]:
    """``integral |f - g| dP`` and an error estimate (a standard error for d > 3)."""
    if isinstance(f, Polynomial) != isinstance(g, Polynomial):
        raise InputError("f and g must be of the same kind")
    if isinstance(f, Polynomial):
        return _l1_poly_1d(f - g, model or standard_gaussian(), tol)
    if f.dim != g.dim:
        raise InputError("f and g must have the same dimension")
    if model is not None and not (model.kind == "gaussian" and model.params == (0.0, 1.0)):
        raise InputError("multivariate L1 distances are taken under the standard Gaussian")
    h = f - g
    d = h.dim
    if not h.terms:
        return 0.0, 0.0
    if d > 3:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
        total, total_sq, n_done = 0.0, 0.0, 0
        while n_done < mc_samples:
            n = min(MC_BATCH, mc_samples - n_done)
            v = np.abs(h(rng.standard_normal((n, d))))
            total += float(v.sum())
            total_sq += float((v * v).sum())
            n_done += n
        mean = total / n_done
        var = max(total_sq / n_done - mean * mean, 0.0)
        return mean, math.sqrt(var / n_done)
    axis = max(range(d), key=h.degree_in)
    if d == 1:
        c = h.as_polynomial_in(0, np.zeros((1, 1)))[0]
        return _abs_gauss_integral(c, -math.inf, math.inf), 1e-15
    # tensor Gauss-Hermite over the other coordinates, exact inner integral
    z, w = np.polynomial.hermite_e.hermegauss(quad_order)
    w = w / math.sqrt(2.0 * math.pi)
    others = [i for i in range(d) if i != axis]
    grids = np.meshgrid(*([z] * len(others)), indexing="ij")
    weights = np.ones_like(grids[0])
    for gi in np.meshgrid(*([w] * len(others)), indexing="ij"):
        weights = weights * gi
    pts = np.zeros((grids[0].size, d))
    for k, i in enumerate(others):
        pts[:, i] = grids[k].ravel()
    coeffs = h.as_polynomial_in(axis, pts)
    wflat = weights.ravel()
    keep = wflat > 1e-300
    total = 0.0
    for c, wt in zip(coeffs[keep], wflat[keep]):
        total += wt * _abs_gauss_integral(c, -math.inf, math.inf)
    return total, 1e-12 * (1.0 + total)


def l1_distance(f, g, model: Optional[DensityModel] = None, **kwargs) -> float:
    """``integral |f - g| dP``; see ``l1_distance_with_error`` for options."""
    return l1_distance_with_error(f, g, model, **kwargs)[0]


# ---------------------------------------------------------------------------
# Monte Carlo oracle


def make_rng(seed_seq: np.random.SeedSequence) -> np.random.Generator:
    """Counter-based generator: the stream depends only on the seed."""
    return np.random.Generator(np.random.Philox(seed_seq))


def pushforward_sampler(f: Map1D, model: DensityModel, shift: float = 0.0) -> Sampler:
    def sample(rng, n):
        return f(model.sample(rng, n)) + shift

    return sample


def gaussian_multipoly_sampler(f: MultiPoly, shift: float = 0.0) -> Sampler:
    def sample(rng, n):
        return f(rng.standard_normal((n, f.dim))) + shift

    return sample


def default_bins(n_samples: int) -> int:
    return min(4096, math.ceil(n_samples ** (1.0 / 3.0) - 1e-9))


def _count(sampler: Sampler, rng, n: int, edges: np.ndarray, lo: float, hi: float):
    nb = edges.size - 1
    counts = np.zeros(nb, dtype=np.int64)
    below = above = 0
    done = 0
    while done < n:
        m = min(MC_BATCH, n - done)
        x = np.asarray(sampler(rng, m), dtype=float)
        below += int(np.count_nonzero(x < lo))
        above += int(np.count_nonzero(x > hi))
        x = x[(x >= lo) & (x <= hi)]
        idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, nb - 1)
        counts += np.bincount(idx, minlength=nb)
        done += m
    return counts, below, above


def tv_histogram_mc(
    sampler_a: Sampler,
    sampler_b: Sampler,
    n_samples: int,
    n_bins: Optional[int] = None,
    range: Optional[Tuple[float, float]] = None,
    seed: int = 0,
    binning: str = "quantile",
) -> TVResult:
    """Histogram estimate of the TV between the laws drawn by two samplers.

    Bins are shared.  With ``binning="quantile"`` the edges are quantiles of an
    independent pilot sample, so bin placement does not depend on the counted
    data.  The estimate is biased upward by sampling noise and downward by
    cancellation inside bins; ``error_estimate`` bounds both plus ``3/sqrt(n)``.
    """
    if n_samples < 10_000:
        raise InputError("n_samples must be at least 1e4")
    nb = int(n_bins) if n_bins is not None else default_bins(n_samples)
    if nb < 1:
        raise InputError("n_bins must be positive")
    if binning not in ("quantile", "uniform"):
        raise InputError(f"unknown binning {binning!r}")
    if range is not None:
        lo, hi = float(range[0]), float(range[1])
        if not lo < hi:
            raise InputError(f"empty histogram range [{lo}, {hi}]")
    elif binning == "uniform":
        raise InputError("uniform binning needs an explicit range")
    else:
        lo, hi = -math.inf, math.inf

    pilot_ss, a_ss, b_ss = np.random.SeedSequence(seed).spawn(3)
    if binning == "uniform":
        edges = np.linspace(lo, hi, nb + 1)
    else:
        prng = make_rng(pilot_ss)
        npil = min(n_samples, PILOT_SAMPLES)
        pooled = np.concatenate([sampler_a(prng, npil), sampler_b(prng, npil)])
        pooled = pooled[(pooled >= lo) & (pooled <= hi)]
        if pooled.size < 2:
            raise InputError("pilot sample has no points inside the histogram range")
        inner = np.quantile(pooled, np.linspace(0.0, 1.0, nb + 1)[1:-1])
        edges = np.unique(np.concatenate([[lo], inner, [hi]]))

    ca, ba, aa = _count(sampler_a, make_rng(a_ss), n_samples, edges, lo, hi)
    cb, bb, ab = _count(sampler_b, make_rng(b_ss), n_samples, edges, lo, hi)
    n = float(n_samples)
    diff = (ca - cb) / n
    value = float(np.abs(diff).sum() + abs(ba - bb) / n + abs(aa - ab) / n)

    sign = np.sign(diff)
    flips = (sign[:-1] * sign[1:]) < 0
    disc = float(np.sum(0.5 * (np.abs(diff[:-1]) + np.abs(diff[1:]))[flips]))
    noise = float(np.sum(np.sqrt(2.0 * (ca + cb) / math.pi)) / n)
    noise += math.sqrt(2.0 * (ba + bb) / math.pi) / n + math.sqrt(2.0 * (aa + ab) / math.pi) / n
    err = disc + noise + 3.0 / math.sqrt(n)
    return TVResult(value, "monte_carlo", err)
