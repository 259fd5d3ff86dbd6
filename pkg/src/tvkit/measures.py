"""Reference densities on the line and exact densities of their pushforwards.

For a piecewise monotone map f and a source density p, the law of f(X) has
density ``q(t) = sum_i p(x_i) / |f'(x_i)|`` over the preimages ``x_i`` of t.
Each monotone piece is handled in local coordinates around its base point, so
that values very close to a critical value keep full relative precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import special, stats

from .errors import InputError, SingularPointError
from .quadrature import Anchor
from .funcspace import (
    Map1D,
    MonotonePiece,
    Polynomial,
    monotone_convex_decomposition,
)

SQRT_2PI = math.sqrt(2.0 * math.pi)
PHI_AT_ONE = math.exp(-0.5) / SQRT_2PI
# half-width, in standard deviations, of the window used for Gaussian quadrature
GAUSS_TRUNCATION = 8.0


@dataclass(frozen=True)
class DensityModel:
    """One-dimensional reference measure with density p.

    ``kind`` is one of ``gaussian``, ``lebesgue``, ``restricted`` or ``chi``.
    ``restricted`` keeps the base density on [a, b] without renormalising.
    """

    kind: str
    params: Tuple[float, ...] = ()
    base: Optional["DensityModel"] = None

    def __post_init__(self):
        if self.kind == "gaussian":
            mean, sigma = self.params
            if not sigma > 0:
                raise InputError("gaussian sigma must be positive")
        elif self.kind in ("lebesgue", "restricted"):
            a, b = self.params
            if not a < b:
                raise InputError(f"{self.kind} interval needs a < b, got [{a}, {b}]")
            if self.kind == "restricted" and self.base is None:
                raise InputError("restricted model needs a base model")
        elif self.kind == "chi":
            (d,) = self.params
            if d < 1 or int(d) != d:
                raise InputError("chi model needs a positive integer dimension")
        else:
            raise InputError(f"unknown density kind {self.kind!r}")

    # -- geometry ---------------------------------------------------------
    @property
    def support(self) -> Tuple[float, float]:
        if self.kind == "gaussian":
            return (-math.inf, math.inf)
        if self.kind == "chi":
            return (0.0, math.inf)
        if self.kind == "lebesgue":
            return self.params
        lo, hi = self.base.support
        return (max(lo, self.params[0]), min(hi, self.params[1]))

    @property
    def effective_support(self) -> Tuple[float, float]:
        """Finite window used for quadrature; see ``truncation_mass``."""
        if self.kind == "gaussian":
            mean, sigma = self.params
            return (mean - GAUSS_TRUNCATION * sigma, mean + GAUSS_TRUNCATION * sigma)
        if self.kind == "chi":
            return (0.0, float(stats.chi.isf(1e-17, self.params[0])))
        if self.kind == "lebesgue":
            return self.params
        lo, hi = self.base.effective_support
        a, b = max(lo, self.params[0]), min(hi, self.params[1])
        if not a < b:
            raise InputError("restriction interval does not meet the base support")
        return (a, b)

    @property
    def truncation_mass(self) -> float:
        """Mass lost by cutting the support down to ``effective_support``."""
        if self.kind == "gaussian":
            return 2.0 * float(special.ndtr(-GAUSS_TRUNCATION))
        if self.kind == "chi":
            return 1e-17
        if self.kind == "lebesgue":
            return 0.0
        return self.base.truncation_mass

    @property
    def mass(self) -> float:
        if self.kind in ("gaussian", "chi"):
            return 1.0
        if self.kind == "lebesgue":
            a, b = self.params
            return b - a
        a, b = self.support
        return self.base.interval_mass(a, b)

    def interval_mass(self, a: float, b: float) -> float:
        if self.kind == "gaussian":
            mean, sigma = self.params
            return float(special.ndtr((b - mean) / sigma) - special.ndtr((a - mean) / sigma))
        if self.kind == "chi":
            d = self.params[0]
            return float(stats.chi.cdf(max(b, 0.0), d) - stats.chi.cdf(max(a, 0.0), d))
        lo, hi = self.support
        a, b = max(a, lo), min(b, hi)
        if a >= b:
            return 0.0
        if self.kind == "lebesgue":
            return b - a
        return self.base.interval_mass(a, b)

    # -- density ----------------------------------------------------------
    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            mean, sigma = self.params
            z = (x - mean) / sigma
            out = np.exp(-0.5 * z * z) / (sigma * SQRT_2PI)
        elif self.kind == "chi":
            out = stats.chi.pdf(x, self.params[0])
        elif self.kind == "lebesgue":
            a, b = self.params
            out = ((x >= a) & (x <= b)).astype(float)
        else:
            a, b = self.support
            out = np.where((x >= a) & (x <= b), self.base.pdf(x), 0.0)
        return out if np.ndim(out) else float(out)

    def _dpdf_abs_sup(self, a: float, b: float) -> float:
        if self.kind == "gaussian":
            mean, sigma = self.params
            za, zb = (a - mean) / sigma, (b - mean) / sigma
            cands = [za, zb] + [z for z in (-1.0, 1.0) if za <= z <= zb]
            g = max(abs(z) * math.exp(-0.5 * z * z) for z in cands if math.isfinite(z)) if any(
                math.isfinite(z) for z in cands
            ) else 0.0
            if za <= -1.0 <= zb or za <= 1.0 <= zb:
                g = max(g, math.exp(-0.5))
            return g / (SQRT_2PI * sigma * sigma)
        if self.kind == "lebesgue":
            return 0.0
        if self.kind == "restricted":
            lo, hi = self.support
            return self.base._dpdf_abs_sup(max(a, lo), min(b, hi))
        # chi: numeric sup on a fine grid
        lo, hi = max(a, 0.0), min(b, self.effective_support[1])
        x = np.linspace(lo, hi, 20001)
        return float(np.max(np.abs(np.gradient(self.pdf(x), x))))

    def _pdf_sup(self, a: float, b: float) -> float:
        if self.kind == "gaussian":
            mean, sigma = self.params
            x = min(max(mean, a), b)
            return float(self.pdf(x))
        if self.kind == "lebesgue":
            return 1.0
        if self.kind == "restricted":
            lo, hi = self.support
            return self.base._pdf_sup(max(a, lo), min(b, hi))
        d = self.params[0]
        mode = math.sqrt(d - 1.0)
        x = min(max(mode, a), b)
        return float(self.pdf(x))

    def sup_bound(self, a: float = -math.inf, b: float = math.inf) -> float:
        """``A = sup p`` over [a, b] intersected with the support."""
        lo, hi = self.support
        return self._pdf_sup(max(a, lo), min(b, hi))

    def lipschitz(self, a: float = -math.inf, b: float = math.inf) -> float:
        """``L = sup |p'|`` over [a, b] intersected with the support."""
        lo, hi = self.support
        return self._dpdf_abs_sup(max(a, lo), min(b, hi))

    @property
    def A(self) -> float:
        return self.sup_bound()

    @property
    def L(self) -> float:
        return self.lipschitz()

    # -- sampling ---------------------------------------------------------
    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` points; sub-probability models return fewer points."""
        if self.kind == "gaussian":
            mean, sigma = self.params
            return mean + sigma * rng.standard_normal(n)
        if self.kind == "chi":
            d = int(self.params[0])
            return np.sqrt(rng.chisquare(d, n))
        if self.kind == "lebesgue":
            a, b = self.params
            if b - a > 1.0 + 1e-12:
                raise InputError("cannot sample a Lebesgue measure of mass > 1")
            u = rng.random(n)
            keep = u < (b - a)
            return a + u[keep]
        a, b = self.support
        x = self.base.sample(rng, n)
        return x[(x >= a) & (x <= b)]

    def describe(self) -> str:
        if self.kind == "gaussian":
            mean, sigma = self.params
            return "gauss" if (mean, sigma) == (0.0, 1.0) else f"gauss:{mean:.12g},{sigma:.12g}"
        if self.kind == "lebesgue":
            return "lebesgue:{:.12g},{:.12g}".format(*self.params)
        if self.kind == "chi":
            return f"chi:{int(self.params[0])}"
        return "restrict:{:.12g},{:.12g}:".format(*self.params) + self.base.describe()


def standard_gaussian() -> DensityModel:
    return DensityModel("gaussian", (0.0, 1.0))


def gaussian(mean: float, sigma: float) -> DensityModel:
    return DensityModel("gaussian", (float(mean), float(sigma)))


def lebesgue_on(a: float, b: float) -> DensityModel:
    return DensityModel("lebesgue", (float(a), float(b)))


def restricted(base: DensityModel, a: float, b: float) -> DensityModel:
    return DensityModel("restricted", (float(a), float(b)), base)


def chi(d: int) -> DensityModel:
    """Law of the Euclidean norm of a standard Gaussian vector in R^d."""
    return DensityModel("chi", (float(d),))


def density(model: DensityModel, x):
    return model.pdf(x)


def parse_density(text: str) -> DensityModel:
    """``gauss``, ``gauss:mean,sigma``, ``lebesgue:a,b``, ``restrict:a,b:<base>``, ``chi:d``."""
    text = text.strip().replace("−", "-")
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()

    def nums(s: str, n: int) -> List[float]:
        parts = [p for p in s.split(",")]
        if len(parts) != n:
            raise InputError(f"density spec {text!r}: expected {n} numbers in {s!r}")
        out = []
        for p in parts:
            try:
                out.append(float(p))
            except ValueError:
                raise InputError(f"density spec {text!r}: cannot parse number {p.strip()!r}") from None
        return out

    if kind in ("gauss", "gaussian"):
        if not rest:
            return standard_gaussian()
        return gaussian(*nums(rest, 2))
    if kind == "lebesgue":
        return lebesgue_on(*nums(rest, 2))
    if kind == "chi":
        (d,) = nums(rest, 1)
        return chi(int(d))
    if kind in ("restrict", "restricted"):
        interval, sep, base = rest.partition(":")
        if not sep:
            raise InputError(f"density spec {text!r}: restrict needs 'restrict:a,b:<base>'")
        a, b = nums(interval, 2)
        return restricted(parse_density(base), a, b)
    raise InputError(f"unknown density kind {kind!r} in {text!r}")


# ---------------------------------------------------------------------------
# local branches


class _Branch:
    """One monotone piece seen from its base point.

    ``g(y) = sgn * (f(base + xdir * y) - c0)`` is convex, increasing, with
    g(0) = 0 on ``[0, length]``.  Low-order Taylor terms that vanish in exact
    arithmetic are zeroed so that g keeps relative precision near y = 0.
    """

    TAYLOR_TERMS = 30

    def __init__(self, f: Map1D, piece: MonotonePiece, model: DensityModel):
        self.piece = piece
        self.f = f
        self.model = model
        self.x0 = piece.base
        self.xdir = 1.0 if piece.base == piece.a else -1.0
        self.length = piece.b - piece.a
        self.m = int(piece.local_order_m)
        self.K = float(piece.local_constant_K)
        self.c0 = float(f(self.x0))
        far = piece.b if self.xdir > 0 else piece.a
        self.sgn = 1.0 if float(f(far)) >= self.c0 else -1.0
        if isinstance(f, Polynomial):
            c = f.taylor(self.x0)
            k = np.arange(c.size)
            e = self.sgn * c * self.xdir**k
            e[: self.m] = 0.0
            self._poly = e
            self._dpoly = (e * k)[1:]
            self._trig = False
            self._noise_scale = 0.0
        else:
            n = f.degree
            kmax = max(self.TAYLOR_TERMS, 2 * n + 4)
            c = f.taylor(self.x0, kmax)
            k = np.arange(kmax + 1)
            e = self.sgn * c * self.xdir**k
            e[: self.m] = 0.0
            self._poly = e
            self._dpoly = (e * k)[1:]
            self._trig = True
            # the series is used where n*y <= 3/2: the dropped tail is below 1.5^31/31!
            self._y_taylor = 1.5 / max(n, 1)
            self._noise_scale = float(np.sum(np.abs(f.cos_coeffs)) + np.sum(np.abs(f.sin_coeffs))) + abs(self.c0)
        self._abs_poly = np.abs(self._poly)
        self.gmax = float(self.g(np.array([self.length]))[0])
        # inverse table in the variable w^(1/m), which is smooth in y
        ty = np.concatenate([[0.0], np.geomspace(self.length * 1e-9, self.length, 257)])
        tw = np.maximum.accumulate(np.maximum(self.g(ty), 0.0))
        self._ty = ty
        self._ts = tw ** (1.0 / self.m)

    @staticmethod
    def _horner(c: np.ndarray, y: np.ndarray) -> np.ndarray:
        acc = np.zeros_like(y)
        for v in c[::-1]:
            acc = acc * y + v
        return acc

    def _mixed(self, y: np.ndarray, series: np.ndarray, direct) -> np.ndarray:
        """Taylor series near the base, ``direct(y)`` further out (trig maps only)."""
        if not self._trig:
            return self._horner(series, y)
        out = np.empty_like(y)
        far = y > self._y_taylor
        near = ~far
        if np.any(near):
            out[near] = self._horner(series, y[near])
        if np.any(far):
            out[far] = direct(y[far])
        return out

    def g(self, y: np.ndarray) -> np.ndarray:
        return self._mixed(y, self._poly, lambda v: self.sgn * (self.f(self.x0 + self.xdir * v) - self.c0))

    def dg(self, y: np.ndarray) -> np.ndarray:
        return self._mixed(
            y, self._dpoly, lambda v: self.sgn * self.xdir * self.f.derivative_value(self.x0 + self.xdir * v, 1)
        )

    def _noise(self, y: np.ndarray) -> np.ndarray:
        """Rounding level of the evaluation of g at y."""
        return 8e-16 * self._mixed(y, self._abs_poly, lambda v: np.full_like(v, self._noise_scale))

    def invert(self, w: np.ndarray) -> np.ndarray:
        """Solve g(y) = w for 0 < w < gmax (safeguarded Newton, vectorised)."""
        sw = w ** (1.0 / self.m)
        j = np.clip(np.searchsorted(self._ts, sw), 1, self._ty.size - 1)
        lo, hi = self._ty[j - 1].copy(), self._ty[j].copy()
        s0, s1 = self._ts[j - 1], self._ts[j]
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(s1 > s0, (sw - s0) / (s1 - s0), 0.5)
        y = lo + np.clip(frac, 0.0, 1.0) * (hi - lo)
        active = np.ones(w.shape, dtype=bool)
        for _ in range(200):
            idx = np.nonzero(active)[0]
            if idx.size == 0:
                break
            yi = y[idx]
            r = self.g(yi) - w[idx]
            # rounding level of the evaluation of g at yi
            noise = self._noise(yi)
            lo[idx] = np.where(r < 0, yi, lo[idx])
            hi[idx] = np.where(r > 0, yi, hi[idx])
            d = self.dg(yi)
            with np.errstate(divide="ignore", invalid="ignore"):
                ynew = yi - r / d
            bad = ~((ynew > lo[idx]) & (ynew < hi[idx]))
            ynew = np.where(bad, 0.5 * (lo[idx] + hi[idx]), ynew)
            done = (np.abs(ynew - yi) <= 4e-16 * np.maximum(yi, 1e-300)) | (np.abs(r) <= noise) | (
                hi[idx] - lo[idx] <= 4e-16 * np.maximum(hi[idx], 1e-300)
            )
            y[idx] = np.where(np.abs(r) <= noise, yi, ynew)
            active[idx[done]] = False
        return y

    def x_of(self, y: np.ndarray) -> np.ndarray:
        return self.x0 + self.xdir * y

    def contribution(self, w: np.ndarray) -> np.ndarray:
        """Density of this piece at local value offset ``w`` (zero off-range)."""
        out = np.zeros_like(w)
        mask = (w > 0) & (w < self.gmax)
        if np.any(mask):
            y = self.invert(w[mask])
            with np.errstate(divide="ignore"):
                out[mask] = self.model.pdf(self.x_of(y)) / self.dg(y)
        return out


class PushforwardDensity:
    """Density of the law of ``f(X) + shift`` for ``X ~ model``."""

    def __init__(self, f: Map1D, model: DensityModel, shift: float = 0.0, _branches=None):
        self.map = f
        self.source = model
        self.shift = float(shift)
        if _branches is None:
            if isinstance(f, Polynomial) and f.degree < 1:
                raise InputError("pushforward through a constant map has no density")
            lo, hi = model.effective_support
            pieces = monotone_convex_decomposition(f, (lo, hi))
            _branches = [_Branch(f, p, model) for p in pieces]
        self.branches: List[_Branch] = _branches

    def shifted(self, u: float) -> "PushforwardDensity":
        return PushforwardDensity(self.map, self.source, self.shift + u, self.branches)

    @property
    def pieces(self) -> List[MonotonePiece]:
        return [b.piece for b in self.branches]

    @property
    def critical_values(self) -> np.ndarray:
        vals = sorted({b.c0 + self.shift for b in self.branches if b.m > 1})
        return np.asarray(vals)

    @property
    def value_range(self) -> Tuple[float, float]:
        lo = min(min(b.c0, b.c0 + b.sgn * b.gmax) for b in self.branches)
        hi = max(max(b.c0, b.c0 + b.sgn * b.gmax) for b in self.branches)
        return lo + self.shift, hi + self.shift

    @property
    def mass(self) -> float:
        lo, hi = self.source.effective_support
        return self.source.interval_mass(lo, hi)

    def special_points(self) -> List[Anchor]:
        pts = []
        for b in self.branches:
            pts.append(Anchor(b.c0, self.shift, b.m))
            pts.append(Anchor(b.c0 + b.sgn * b.gmax, self.shift, 1))
        return pts

    def evaluate_at(self, anchor_c0: np.ndarray, anchor_shift: np.ndarray, offset: np.ndarray) -> np.ndarray:
        """Density at ``t = anchor_c0 + anchor_shift + offset`` (all arrays)."""
        total = np.zeros(np.shape(offset))
        for b in self.branches:
            w = b.sgn * (((anchor_c0 - b.c0) + (anchor_shift - self.shift)) + offset)
            total += b.contribution(w)
        return total

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        out = self.evaluate_at(flat, np.zeros_like(flat), np.zeros_like(flat)).reshape(t.shape)
        return out if out.ndim else float(out)

    def describe(self) -> str:
        s = f"{self.map.describe()} under {self.source.describe()}"
        return s + (f" shifted by {self.shift:.12g}" if self.shift else "")


# ---------------------------------------------------------------------------
# scalar operations


def _pieces_for(f: Map1D, model: DensityModel) -> List[MonotonePiece]:
    return monotone_convex_decomposition(f, model.effective_support)


def preimages(f: Map1D, pieces: Sequence[MonotonePiece], t: float) -> np.ndarray:
    """One solution of f(x) = t per piece whose value range contains t."""
    t = float(t)
    sols = []
    for piece in pieces:
        a, b = piece.a, piece.b
        if not (math.isfinite(a) and math.isfinite(b)):
            if not isinstance(f, Polynomial):
                raise InputError("infinite pieces are only supported for polynomials")
            reach = (f - t).cauchy_bound() + 1.0
            a = max(a, piece.base - reach) if not math.isfinite(a) else a
            b = min(b, piece.base + reach) if not math.isfinite(b) else b
        fa, fb = float(f(a)), float(f(b))
        lo, hi = min(fa, fb), max(fa, fb)
        if t < lo or t > hi:
            continue
        if t == fa:
            sols.append(a)
            continue
        if t == fb:
            sols.append(b)
            continue
        local = MonotonePiece(a, b, piece.direction, piece.shape, piece.local_order_m,
                              piece.local_constant_K, piece.base, piece.tail)
        br = _Branch(f, local, lebesgue_on(a, b))
        w = np.array([br.sgn * (t - br.c0)])
        if w[0] <= 0:
            sols.append(br.x0)
        elif w[0] >= br.gmax:
            sols.append(b if br.xdir > 0 else a)
        else:
            sols.append(float(br.x_of(br.invert(w))[0]))
    sols.sort()
    out: List[float] = []
    for x in sols:
        if out and abs(x - out[-1]) <= 1e-12 * max(1.0, abs(x)):
            continue
        out.append(x)
    return np.asarray(out)


def pushforward_density(f: Map1D, model: DensityModel, t: float) -> float:
    """``sum_i p(x_i) / |f'(x_i)|`` over the preimages of ``t``.

    Raises ``SingularPointError`` when a preimage inside the support is a
    critical point (the density is infinite there).
    """
    lo, hi = model.effective_support
    pieces = _pieces_for(f, model)
    xs = preimages(f, pieces, t)
    d1 = f.deriv()
    total = 0.0
    for x in xs:
        if not lo <= x <= hi:
            continue
        p = float(model.pdf(x))
        slope = abs(float(d1(x)))
        if p == 0.0:
            continue
        if slope == 0.0 or any(x == pc.base and pc.local_order_m > 1 for pc in pieces):
            raise SingularPointError(f"t={t} is a critical value of the map (preimage x={x})")
        total += p / slope
    return total
