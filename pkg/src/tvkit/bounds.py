"""Smoothing-decomposition bound, its diagnostics, and related exact checks."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import special
from scipy.interpolate import PchipInterpolator

from .errors import InputError
from .funcspace import MultiPoly, Polynomial, TrigPolynomial, real_roots
from .measures import DensityModel, PushforwardDensity, standard_gaussian
from .quadrature import adaptive_integrate, integrate_breakpoints
from .tvmetrics import (
    ModulusCurve,
    gaussian_multipoly_sampler,
    l1_distance_with_error,
    modulus_curve,
    tv_histogram_mc,
    tv_pushforward,
)

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
SQRT_PI_OVER_2 = math.sqrt(math.pi / 2.0)


# ---------------------------------------------------------------------------
# closed forms


def gaussian_abs_moment(alpha: float) -> float:
    """``E|nu|^alpha`` for a standard normal nu."""
    if not alpha > 0:
        raise InputError("alpha must be positive")
    log_val = 0.5 * alpha * math.log(2.0) + math.lgamma(0.5 * (alpha + 1.0)) - 0.5 * math.log(math.pi)
    return math.exp(log_val)


@dataclass(frozen=True)
class BoundReport:
    """Every quantity of the smoothing bound at the balancing noise level.

    ``sigma_opt`` equalises ``(C_f + C_g) sigma^alpha`` with ``l1 / sigma``, which
    turns the split into ``C * l1^(alpha/(alpha+1))`` up to the moment constants.
    ``sigma_product`` is the alternative ``((C_f + C_g) l1)^(1/(1+alpha))``, kept
    for comparison.
    """

    alpha: float
    C_f: float
    C_g: float
    abs_moment: float
    sigma_opt: float
    sigma_product: float
    constant_C: float
    l1: float
    raw_bound: float
    clamped_bound: float
    delta1_bound: float
    delta2_bound: float
    delta3_bound: float
    degenerate: bool = False

    @property
    def diagnostics(self) -> Tuple[float, float, float]:
        return (self.delta1_bound, self.delta2_bound, self.delta3_bound)

    @property
    def diagnostic_sum(self) -> float:
        return self.delta1_bound + self.delta2_bound + self.delta3_bound

    def to_dict(self) -> dict:
        return asdict(self)


def theorem1_bound(C_f: float, C_g: float, alpha: float, l1: float) -> BoundReport:
    """``C * l1^(alpha/(alpha+1))`` with ``C = (C_f+C_g)^(1/(alpha+1)) (E|nu|^alpha + sqrt(pi/2))``."""
    if not alpha > 0:
        raise InputError("alpha must be positive")
    if min(C_f, C_g, l1) < 0 or not all(map(math.isfinite, (C_f, C_g, l1))):
        raise InputError("C_f, C_g and l1 must be finite and non-negative")
    S = C_f + C_g
    E = gaussian_abs_moment(alpha)
    C = S ** (1.0 / (alpha + 1.0)) * (E + SQRT_PI_OVER_2)
    if l1 == 0 or S == 0:
        return BoundReport(alpha, C_f, C_g, E, 0.0, 0.0, C, l1, 0.0, 0.0, 0.0, 0.0, 0.0, degenerate=True)
    raw = C * l1 ** (alpha / (alpha + 1.0))
    sigma = (l1 / S) ** (1.0 / (1.0 + alpha))
    sigma_product = (S * l1) ** (1.0 / (1.0 + alpha))
    d1 = C_f * sigma**alpha * E
    d2 = C_g * sigma**alpha * E
    d3 = 2.0 / (sigma * math.sqrt(2.0 * math.pi)) * l1
    return BoundReport(alpha, C_f, C_g, E, sigma, sigma_product, C, l1, raw, min(2.0, raw), d1, d2, d3)


def delta3_linear_bound(l1: float, sigma: float) -> float:
    return 2.0 / (sigma * math.sqrt(2.0 * math.pi)) * l1


def delta3_exact_with_error(
    f: Polynomial, g: Polynomial, model: DensityModel, sigma: float, tol: float = 1e-12
) -> Tuple[float, float]:
    """``integral 2(2 Phi(|f - g|/(2 sigma)) - 1) dP`` and its error estimate."""
    if not sigma > 0:
        raise InputError("sigma must be positive")
    h = f - g
    if h.is_zero:
        return 0.0, 0.0
    lo, hi = model.effective_support
    pts = [lo, hi]
    if h.degree >= 1:
        pts += [r for r in real_roots(h, (lo, hi))]
    c = 1.0 / (2.0 * math.sqrt(2.0) * sigma)
    val, err = integrate_breakpoints(lambda x: 2.0 * special.erf(np.abs(h(x)) * c) * model.pdf(x), pts, tol)
    return val, err + 2.0 * model.truncation_mass


def delta3_exact(f: Polynomial, g: Polynomial, model: DensityModel, sigma: float, tol: float = 1e-12) -> float:
    return delta3_exact_with_error(f, g, model, sigma, tol)[0]


# ---------------------------------------------------------------------------
# expected shift modulus under Gaussian noise (measured delta_1, delta_2)


class ModulusProfile:
    """Interpolant of ``u -> delta_f(u)`` on a wide geometric grid.

    Interpolation is monotone cubic in (log u, log delta).  Below the grid the
    leading power ``u^(1/m)`` is used; above it delta is bounded by 2 * mass.
    """

    def __init__(self, f, model: DensityModel, u_lo: float = 1e-10, u_hi: float = 100.0, points: int = 97):
        self.curve = modulus_curve(f, model, np.geomspace(u_lo, u_hi, points))
        q = PushforwardDensity(f, model)
        self.m_max = max(b.m for b in q.branches)
        self.mass = q.mass
        self.u_lo, self.u_hi = u_lo, u_hi
        u, d = self.curve.u_grid, self.curve.delta_values
        self._fine = PchipInterpolator(np.log(u), np.log(d))
        self._coarse = PchipInterpolator(np.log(u[::2]), np.log(d[::2]))
        self.quad_error = float(np.max(self.curve.error_estimates))

    def _eval(self, interp, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = np.empty_like(u)
        low = u < self.u_lo
        high = u > self.u_hi
        mid = ~(low | high)
        d_lo = self.curve.delta_values[0]
        out[low] = d_lo * (u[low] / self.u_lo) ** (1.0 / self.m_max)
        out[high] = 2.0 * self.mass
        out[mid] = np.exp(interp(np.log(u[mid])))
        out[u <= 0] = 0.0
        return out

    def __call__(self, u):
        return self._eval(self._fine, u)

    def expectation(self, sigma: float, tol: float = 1e-10) -> Tuple[float, float]:
        """``E delta_f(sigma |nu|)`` and an error estimate."""
        m = float(self.m_max)
        s_max = 9.0 ** (1.0 / m)

        def integrand(interp):
            def fn(_ids, s):
                v = s**m
                return self._eval(interp, sigma * v) * 2.0 * np.exp(-0.5 * v * v) / math.sqrt(2 * math.pi) * m * s ** (m - 1)
            return fn

        fine, e1 = adaptive_integrate(integrand(self._fine), [0], [0.0], [s_max], tol)
        coarse, _ = adaptive_integrate(integrand(self._coarse), [0], [0.0], [s_max], tol)
        err = abs(float(fine[0]) - float(coarse[0])) + e1 + self.quad_error + 2.0 * math.erfc(9.0 / math.sqrt(2.0))
        return float(fine[0]), err


_PROFILE_CACHE: dict = {}


def modulus_profile(f: Polynomial, model: DensityModel) -> ModulusProfile:
    """Cached profile; the constant term of f does not change the shift modulus."""
    key = (tuple(f.coeffs[1:].tolist()), model)
    prof = _PROFILE_CACHE.get(key)
    if prof is None:
        prof = ModulusProfile(f, model)
        _PROFILE_CACHE[key] = prof
    return prof


def measured_noise_modulus(f: Polynomial, model: DensityModel, sigma: float) -> Tuple[float, float]:
    """``E delta_f(sigma |nu|)``: the averaged shift modulus that controls delta_1."""
    if not sigma > 0:
        raise InputError("sigma must be positive")
    return modulus_profile(f, model).expectation(sigma)


# ---------------------------------------------------------------------------
# multivariate: gradient norm and rate checks


def _gh_tensor(d: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    z, w = np.polynomial.hermite_e.hermegauss(order)
    w = w / math.sqrt(2.0 * math.pi)
    grids = np.meshgrid(*([z] * d), indexing="ij")
    wgrids = np.meshgrid(*([w] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wt = np.ones(pts.shape[0])
    for g in wgrids:
        wt = wt * g.ravel()
    return pts, wt


def gradient_gram(f: MultiPoly, quad_order: Optional[int] = None) -> np.ndarray:
    """``G_ij = integral d_i f d_j f dP`` under the standard Gaussian (exact rule)."""
    d = f.dim
    order = quad_order or max(1, f.degree)  # exact for degree <= 2*order - 1
    pts, wt = _gh_tensor(d, order)
    grads = np.stack([np.atleast_1d(f.partial(i)(pts)) * np.ones(pts.shape[0]) for i in range(d)], axis=1)
    return (grads * wt[:, None]).T @ grads


def _directions(d: int, n: int) -> np.ndarray:
    if d == 1:
        return np.ones((1, 1))
    if d == 2:
        th = np.pi * np.arange(n) / n
        return np.column_stack([np.cos(th), np.sin(th)])
    if d == 3:
        k = np.arange(n) + 0.5
        z = 1.0 - 2.0 * k / n
        r = np.sqrt(1.0 - z * z)
        phi = np.pi * (1.0 + math.sqrt(5.0)) * k
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(d * 1_000_003 + n)))
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def grad_star_norm(f: MultiPoly, n_directions: int = 64, quad_order: Optional[int] = None) -> float:
    """``sup_e (integral (d_e f)^2 dP)^(1/2)`` over a direction grid, refined by doubling."""
    d = f.dim
    if d > 6:
        raise InputError("grad_star_norm supports d <= 6")
    if d in (2, 3) and n_directions < 64:
        raise InputError("need at least 64 directions for d = 2 or 3")
    G = gradient_gram(f, quad_order)
    n = max(1, int(n_directions))
    prev = None
    while True:
        e = _directions(d, n)
        val = math.sqrt(max(0.0, float(np.max(np.einsum("ni,ij,nj->n", e, G, e)))))
        if d == 1 or (prev is not None and abs(val - prev) < 1e-4) or n >= 1 << 16:
            return val
        prev, n = val, 2 * n


def grad_star_norm_exact(f: MultiPoly, quad_order: Optional[int] = None) -> float:
    """Largest eigenvalue form of the same supremum."""
    G = gradient_gram(f, quad_order)
    return math.sqrt(max(0.0, float(np.linalg.eigvalsh(G)[-1])))


def multipoly_to_polynomial(f: MultiPoly) -> Polynomial:
    if f.dim != 1:
        raise InputError("only one-dimensional polynomials convert")
    c = np.zeros(f.degree + 1)
    for coef, (e,) in f.terms:
        c[e] += coef
    return Polynomial(c)


@dataclass(frozen=True)
class MCConfig:
    n_samples: int = 1_000_000
    n_bins: Optional[int] = None
    seed: int = 0


@dataclass(frozen=True)
class RatePoint:
    measured_tv: float
    tv_error: float
    l1: float
    rate_point: Optional[Tuple[float, float]]
    method: str


def theorem2_check(f: MultiPoly, g: MultiPoly, mc: MCConfig = MCConfig(), method: str = "auto") -> RatePoint:
    """Measured TV and L1 distance for one pair; ``rate_point = (log l1, log tv)``."""
    if f.dim != g.dim:
        raise InputError("f and g must have the same dimension")
    if f.degree < 1 or g.degree < 1:
        raise InputError("f and g must be non-constant")
    if method == "auto":
        method = "quadrature" if f.dim == 1 else "monte_carlo"
    l1, _ = l1_distance_with_error(f, g, seed=mc.seed)
    if l1 == 0.0:
        return RatePoint(0.0, 0.0, 0.0, None, method)
    if method == "quadrature":
        if f.dim != 1:
            raise InputError("quadrature is available for d = 1 only")
        r = tv_pushforward(multipoly_to_polynomial(f), multipoly_to_polynomial(g), standard_gaussian())
    elif method == "monte_carlo":
        r = tv_histogram_mc(
            gaussian_multipoly_sampler(f), gaussian_multipoly_sampler(g), mc.n_samples, mc.n_bins, seed=mc.seed
        )
    else:
        raise InputError(f"unknown method {method!r}")
    point = (math.log(l1), math.log(r.value)) if r.value > 0 else None
    return RatePoint(r.value, r.error_estimate, l1, point, method)


# ---------------------------------------------------------------------------
# trigonometric polynomials


def _bareiss_det(M: List[List[int]]) -> int:
    """Exact integer determinant (fraction-free elimination)."""
    a = [row[:] for row in M]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def flatness_system(n: int, m: Optional[int] = None) -> List[List[int]]:
    """Rows ``sum k^(2j-1) b_k`` and ``sum k^(2j) a_k`` (j = 1..m) in unknowns (b_1..b_n, a_1..a_n)."""
    m = n if m is None else m
    rows = []
    for j in range(1, m + 1):
        rows.append([k ** (2 * j - 1) for k in range(1, n + 1)] + [0] * n)
    for j in range(1, m + 1):
        rows.append([0] * n + [k ** (2 * j) for k in range(1, n + 1)])
    return rows


@dataclass(frozen=True)
class VandermondeCheck:
    n: int
    W: int
    Delta: int
    Delta_dense: int
    nonzero: bool

    def to_dict(self) -> dict:
        return {"n": self.n, "W": str(self.W), "Delta": str(self.Delta),
                "Delta_dense": str(self.Delta_dense), "nonzero": self.nonzero}


def vandermonde_system_check(n: int) -> VandermondeCheck:
    """``W = prod_{i<j} (j^2 - i^2)`` and ``Delta = (n!)^3 W^2``, with a dense cross-check."""
    if not 1 <= n <= 12:
        raise InputError("n must be between 1 and 12")
    W = 1
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            W *= j * j - i * i
    delta = math.factorial(n) ** 3 * W * W
    dense = _bareiss_det(flatness_system(n))
    return VandermondeCheck(n, W, delta, dense, delta != 0)


def flatness_rank(n: int, m: int) -> int:
    """Rank of the 2m x 2n vanishing-derivative system (exact)."""
    return _rank([[Fraction(v) for v in r] for r in flatness_system(n, m)], 2 * n)


def max_flatness_order(n: int) -> int:
    """Largest number of consecutive vanishing derivatives a non-zero degree-n trig polynomial can have at a point."""
    best = 0
    for count in range(1, 2 * n + 2):
        # conditions f^(l)(0) = 0 for l = 1..count in the 2n unknowns
        odd = (count + 1) // 2
        even = count // 2
        rows = [[k ** (2 * j - 1) for k in range(1, n + 1)] + [0] * n for j in range(1, odd + 1)]
        rows += [[0] * n + [k ** (2 * j) for k in range(1, n + 1)] for j in range(1, even + 1)]
        frows = [[Fraction(v) for v in r] for r in rows]
        if _rank(frows, 2 * n) < 2 * n:
            best = count
    return best


def _rank(rows: List[List[Fraction]], ncols: int) -> int:
    rows = [r[:] for r in rows]
    rank, col = 0, 0
    while rank < len(rows) and col < ncols:
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                fac = rows[i][col] / rows[rank][col]
                rows[i] = [x - fac * y for x, y in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def flattened_trig(n: int) -> TrigPolynomial:
    """Cosine polynomial of degree n with f^(l)(0) = 0 for l = 1..2n-1 (a_n = 1)."""
    if n < 1:
        raise InputError("n must be positive")
    if n == 1:
        return TrigPolynomial([0.0, 1.0])
    # sum_k a_k k^(2j) = 0 for j = 1..n-1 with a_n = 1
    A = [[Fraction(k ** (2 * j)) for k in range(1, n)] for j in range(1, n)]
    rhs = [Fraction(-(n ** (2 * j))) for j in range(1, n)]
    size = n - 1
    for c in range(size):
        piv = next(i for i in range(c, size) if A[i][c] != 0)
        A[c], A[piv] = A[piv], A[c]
        rhs[c], rhs[piv] = rhs[piv], rhs[c]
        for i in range(size):
            if i != c and A[i][c] != 0:
                fac = A[i][c] / A[c][c]
                A[i] = [x - fac * y for x, y in zip(A[i], A[c])]
                rhs[i] -= fac * rhs[c]
    a = [rhs[i] / A[i][i] for i in range(size)]
    return TrigPolynomial([0.0] + [float(v) for v in a] + [1.0])


def trig_modulus_experiment(
    f: TrigPolynomial, model: Optional[DensityModel] = None, u_grid: Sequence[float] = (), tol: float = 1e-12
) -> ModulusCurve:
    """Shift modulus of a trigonometric polynomial under a (truncated) Gaussian."""
    model = model or standard_gaussian()
    if f.degree < 1 or f.deriv().is_zero:
        raise InputError("f must be non-constant")
    u = np.asarray(u_grid if len(u_grid) else np.geomspace(1e-4, 1e-2, 16), dtype=float)
    return modulus_curve(f, model, u, tol)
