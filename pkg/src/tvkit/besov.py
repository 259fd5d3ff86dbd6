"""Constants of the shift modulus: per-piece bounds, partition certificates, fits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InputError, NumericFailure
from .funcspace import Map1D, MonotonePiece, Polynomial, local_order, monotone_convex_decomposition
from .measures import DensityModel, _Branch, lebesgue_on
from .tvmetrics import ModulusCurve

SUP_GRID_POINTS = 10_000
MAX_TAIL_SEGMENTS = 10_000


@dataclass(frozen=True)
class BesovEstimate:
    alpha: float
    constant_C: float
    kind: str
    residual: float = 0.0
    alpha_stderr: float = 0.0
    n_points: int = 0

    def __post_init__(self):
        if self.kind not in ("certified", "fitted"):
            raise InputError(f"unknown estimate kind {self.kind!r}")

    def bound(self, u):
        return self.constant_C * np.asarray(u, dtype=float) ** self.alpha

    def dominates(self, curve: ModulusCurve, slack: float = 1e-6) -> bool:
        """True when delta(u) <= C u^alpha + slack at every grid point."""
        return bool(np.all(curve.delta_values <= self.bound(curve.u_grid) + slack))


# ---------------------------------------------------------------------------
# single pieces


def _check_piece(f: Map1D, piece: MonotonePiece) -> None:
    if not (math.isfinite(piece.a) and math.isfinite(piece.b)) or not piece.a < piece.b:
        raise InputError("piece must be a finite interval with a < b")
    x = np.linspace(piece.a, piece.b, 22)[1:-1]
    d1 = np.asarray(f.deriv()(x), dtype=float)
    if not (np.all(d1 > 0) or np.all(d1 < 0)):
        raise InputError(f"f is not strictly monotone on [{piece.a}, {piece.b}]")


def prop1_constant(f: Map1D, piece: MonotonePiece) -> float:
    """Smallest C with ``|f^-1(f(base) + w) - base| <= C w^(1/m)`` on the piece.

    The supremum of ``y / g(y)^(1/m)``, ``g(y) = |f(base +/- y) - f(base)|``, is
    taken over a geometric grid refined toward the base, the limit ``K^(-1/m)``
    at the base, and a local polish around the best grid point.
    """
    _check_piece(f, piece)
    br = _Branch(f, piece, lebesgue_on(piece.a, piece.b))
    m = br.m
    length = br.length
    y = np.geomspace(length * 1e-9, length, SUP_GRID_POINTS)
    gy = br.g(y)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(gy > 0, y / gy ** (1.0 / m), 0.0)
    best = float(np.max(ratio))
    limit = br.K ** (-1.0 / m) if br.K > 0 else math.inf
    i = int(np.argmax(ratio))
    if 0 < i < y.size - 1:
        res = minimize_scalar(
            lambda t: -float(t / br.g(np.array([t]))[0] ** (1.0 / m)),
            bounds=(y[i - 1], y[i + 1]),
            method="bounded",
            options={"xatol": 1e-14 * y[i]},
        )
        best = max(best, -float(res.fun))
    return float(max(best, limit))


def prop2_bound(f: Map1D, model: DensityModel, piece: MonotonePiece, u: float, C_f: Optional[float] = None) -> float:
    """``[3A + L(b - a)] C_f u^(1/m)`` with A, L the sup of p and |p'| on the piece."""
    if u < 0:
        raise InputError("u must be non-negative")
    if u == 0:
        return 0.0
    A = model.sup_bound(piece.a, piece.b)
    L = model.lipschitz(piece.a, piece.b)
    c = prop1_constant(f, piece) if C_f is None else C_f
    return (3.0 * A + L * (piece.b - piece.a)) * c * u ** (1.0 / piece.local_order_m)


# ---------------------------------------------------------------------------
# partition certificate


@dataclass(frozen=True)
class SegmentConstant:
    a: float
    b: float
    region: str  # "central", "right" or "left"
    m: int
    K: float
    A: float
    L: float
    C_f: float

    @property
    def term(self) -> float:
        return (3.0 * self.A + self.L * (self.b - self.a)) * self.C_f

    def to_dict(self) -> dict:
        return {
            "a": self.a, "b": self.b, "region": self.region, "m": self.m, "K": self.K,
            "A": self.A, "L": self.L, "C_f": self.C_f, "term": self.term,
        }


@dataclass(frozen=True)
class PartitionCertificate:
    """Partition-and-sum bound ``delta(u) <= total * u^alpha`` for u in (0, 1]."""

    map_description: str
    model_description: str
    breakpoints: Tuple[float, ...]
    segments: Tuple[SegmentConstant, ...]
    C1: float
    C2: float
    C3: float
    truncation_bound: float
    tail_tol: float
    alpha: float
    m_max: int

    @property
    def total(self) -> float:
        return self.C1 + self.C2 + self.C3 + self.truncation_bound

    def estimate(self) -> BesovEstimate:
        return BesovEstimate(self.alpha, self.total, "certified")

    def to_dict(self) -> dict:
        return {
            "map": self.map_description,
            "model": self.model_description,
            "alpha": self.alpha,
            "m_max": self.m_max,
            "breakpoints": list(self.breakpoints),
            "C1_central": self.C1,
            "C2_right_tail": self.C2,
            "C3_left_tail": self.C3,
            "truncation_bound": self.truncation_bound,
            "tail_tol": self.tail_tol,
            "total": self.total,
            "segments": [s.to_dict() for s in self.segments],
        }


def _sub_piece(f: Map1D, parent: MonotonePiece, a: float, b: float) -> MonotonePiece:
    if parent.base in (a, b):
        base = parent.base
        known = parent.local_order_m > 1
    else:
        base = a if (parent.shape == "convex") == (parent.direction == "increasing") else b
        known = False
    m, K = local_order(f, base, "right" if base == a else "left", known_critical=known)
    return MonotonePiece(a, b, parent.direction, parent.shape, m, K, base, False)


def _segment(f: Map1D, model: DensityModel, piece: MonotonePiece, region: str) -> SegmentConstant:
    return SegmentConstant(
        piece.a, piece.b, region, int(piece.local_order_m), float(piece.local_constant_K),
        model.sup_bound(piece.a, piece.b), model.lipschitz(piece.a, piece.b), prop1_constant(f, piece),
    )


def _tail_term_bound(f: Polynomial, model: DensityModel, s: float, outward: float) -> float:
    """Bound on the term of the unit segment starting at ``s`` (moving ``outward``).

    Valid once the segment lies beyond every critical point and beyond one
    standard deviation, where |f'|, p and |p'| are monotone along the tail.
    """
    slope = abs(float(f.deriv()(s)))
    if slope == 0.0:
        return math.inf
    A = float(model.pdf(s))
    L = model.lipschitz(min(s, s + outward), max(s, s + outward))
    return (3.0 * A + L) / slope


def certified_modulus_constant(f: Polynomial, model: DensityModel, tail_tol: float = 1e-12) -> PartitionCertificate:
    """Sum per-piece constants over central pieces and unit tail segments."""
    if not tail_tol > 0:
        raise InputError("tail_tol must be positive")
    if model.kind != "gaussian":
        raise InputError("certificates are built for Gaussian reference densities")
    if not isinstance(f, Polynomial) or f.degree < 1:
        raise InputError("certificates need a non-constant polynomial")
    mean, sigma = model.params
    pieces = monotone_convex_decomposition(f, (-math.inf, math.inf))
    breakpoints = tuple(p.b for p in pieces[:-1])
    central = [p for p in pieces if math.isfinite(p.a) and math.isfinite(p.b)]
    segs: List[SegmentConstant] = [_segment(f, model, p, "central") for p in central]
    C1 = sum(s.term for s in segs)

    right_piece, left_piece = pieces[-1], pieces[0]
    right_start = right_piece.a if math.isfinite(right_piece.a) else mean
    left_start = left_piece.b if math.isfinite(left_piece.b) else mean
    trunc = 0.0
    tails = {}
    for region, parent, start, outward in (
        ("right", right_piece, right_start, 1.0),
        ("left", left_piece, left_start, -1.0),
    ):
        total = 0.0
        j = 0
        while True:
            if j >= MAX_TAIL_SEGMENTS:
                raise NumericFailure("tail series did not reach the requested tolerance")
            s = start + outward * j
            a, b = (s, s + 1.0) if outward > 0 else (s - 1.0, s)
            seg = _segment(f, model, _sub_piece(f, parent, a, b), region)
            segs.append(seg)
            total += seg.term
            j += 1
            nxt = start + outward * j
            # stop once the term is small and the analytic remainder applies
            if seg.term < tail_tol * 2.0 ** (-j) and outward * (nxt - mean) >= sigma:
                t1 = _tail_term_bound(f, model, nxt, outward)
                t2 = _tail_term_bound(f, model, nxt + outward, outward)
                if t1 < math.inf and t2 < t1:
                    trunc += t1 / (1.0 - t2 / t1)
                    break
        tails[region] = total
    m_max = max(s.m for s in segs)
    return PartitionCertificate(
        f.describe(), model.describe(), breakpoints, tuple(segs), C1, tails["right"], tails["left"],
        trunc, tail_tol, 1.0 / m_max, m_max,
    )


# ---------------------------------------------------------------------------
# fits


def fit_power_law(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float, float, float]:
    """Least squares ``log y = log C + alpha log x``: (alpha, C, rms residual, stderr of alpha)."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    n = lx.size
    if n < 2:
        raise InputError("need at least two points to fit a power law")
    X = np.column_stack([np.ones(n), lx])
    coef, *_ = np.linalg.lstsq(X, ly, rcond=None)
    resid = ly - X @ coef
    rms = float(math.sqrt(np.mean(resid**2)))
    if n > 2:
        s2 = float(resid @ resid) / (n - 2)
        stderr = math.sqrt(s2 / float(np.sum((lx - lx.mean()) ** 2)))
    else:
        stderr = 0.0
    return float(coef[1]), float(math.exp(coef[0])), rms, stderr


def fit_smoothness(curve: ModulusCurve, window: Tuple[float, float] = (0.0, math.inf)) -> BesovEstimate:
    """Fit ``delta(u) = C u^alpha`` to the unsaturated points inside ``window``."""
    lo, hi = window
    u, d = curve.u_grid, curve.delta_values
    keep = (u >= lo) & (u <= hi) & (d > 0) & (d < curve.saturation * (1.0 - 1e-9))
    if int(np.count_nonzero(keep)) < 8:
        raise InputError(f"only {int(np.count_nonzero(keep))} usable points in window; need 8")
    alpha, C, rms, stderr = fit_power_law(u[keep], d[keep])
    return BesovEstimate(alpha, C, "fitted", rms, stderr, int(np.count_nonzero(keep)))
