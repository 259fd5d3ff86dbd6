"""Vectorised adaptive Gauss-Legendre quadrature.

Integrals over value space are split at the special points of the densities
involved. Near a point of local order M the variable is changed to
``t = anchor +/- s**M``, which turns the algebraic singularity of a
pushforward density into a smooth integrand in s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .errors import NumericFailure

GL_ORDER = 10
MAX_ROUNDS = 60
MAX_ACTIVE = 200_000
# special values closer than this (relative) are merged into one breakpoint
CLUSTER_REL = 1e-13
# intervals whose error is below this fraction of their own integral are
# at the rounding level of the integrand and are not split further
REL_FLOOR = 2e-13


@lru_cache(maxsize=None)
def _rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _apply(func, ids: np.ndarray, lo: np.ndarray, hi: np.ndarray, n: int) -> np.ndarray:
    x, w = _rule(n)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = func(np.repeat(ids, n), pts.ravel()).reshape(pts.shape)
    return half * (vals @ w)


def adaptive_integrate(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    ids: Sequence[int],
    a: Sequence[float],
    b: Sequence[float],
    tol: float,
) -> Tuple[np.ndarray, float]:
    """Integrate ``func(id, s)`` over ``[a[k], b[k]]`` for every segment k.

    ``func`` receives flat arrays of segment ids and abscissae.  Each segment
    gets an equal share of the absolute tolerance, spread over its length.
    Returns the per-segment integrals and a total error estimate.
    """
    ids = np.asarray(ids, dtype=int)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    nseg = ids.size
    totals = np.zeros(nseg)
    if nseg == 0:
        return totals, 0.0
    seg_len = np.abs(b - a)
    share = tol / nseg
    err_total = 0.0
    # seg index (position in ids), lo, hi, coarse estimate
    pos = np.arange(nseg)
    lo, hi = a.copy(), b.copy()
    coarse = _apply(func, ids[pos], lo, hi, GL_ORDER)
    for _ in range(MAX_ROUNDS):
        if pos.size == 0:
            break
        if pos.size > MAX_ACTIVE:
            raise NumericFailure("adaptive quadrature did not converge (too many subintervals)")
        mid = 0.5 * (lo + hi)
        left = _apply(func, ids[pos], lo, mid, GL_ORDER)
        right = _apply(func, ids[pos], mid, hi, GL_ORDER)
        fine = left + right
        err = np.abs(fine - coarse)
        width = np.abs(hi - lo)
        with np.errstate(divide="ignore", invalid="ignore"):
            budget = share * np.where(seg_len[pos] > 0, width / seg_len[pos], 1.0)
        tiny = width <= 1e-15 * np.maximum(np.abs(lo), np.abs(hi)) + 1e-300
        ok = (err <= budget) | (err <= REL_FLOOR * np.abs(fine)) | tiny | ~np.isfinite(fine)
        if np.any(~np.isfinite(fine[ok])):
            raise NumericFailure("non-finite integrand value in quadrature")
        np.add.at(totals, pos[ok], fine[ok])
        err_total += float(np.sum(err[ok]))
        keep = ~ok
        pos = np.concatenate([pos[keep], pos[keep]])
        new_lo = np.concatenate([lo[keep], mid[keep]])
        new_hi = np.concatenate([mid[keep], hi[keep]])
        coarse = np.concatenate([left[keep], right[keep]])
        lo, hi = new_lo, new_hi
    else:
        if pos.size:
            np.add.at(totals, pos, coarse)
            err_total += float(np.sum(np.abs(coarse)))
    return totals, err_total


def integrate(func: Callable[[np.ndarray], np.ndarray], a: float, b: float, tol: float = 1e-12) -> Tuple[float, float]:
    """Scalar convenience wrapper: integral of a vectorised ``func`` on [a, b]."""
    vals, err = adaptive_integrate(lambda _i, s: func(s), [0], [a], [b], tol)
    return float(vals[0]), err


def integrate_breakpoints(
    func: Callable[[np.ndarray], np.ndarray], points: Sequence[float], tol: float = 1e-12
) -> Tuple[float, float]:
    """Integral of ``func`` over [min(points), max(points)] split at every point."""
    pts = np.unique(np.asarray(points, dtype=float))
    if pts.size < 2:
        return 0.0, 0.0
    n = pts.size - 1
    vals, err = adaptive_integrate(lambda _i, s: func(s), np.arange(n), pts[:-1], pts[1:], tol)
    return float(vals.sum()), err


# ---------------------------------------------------------------------------
# value-space integration


@dataclass(frozen=True)
class Anchor:
    """Breakpoint ``c0 + shift`` with local order ``order``."""

    c0: float
    shift: float
    order: int

    @property
    def value(self) -> float:
        return self.c0 + self.shift


def _cluster(points: Sequence[Anchor]) -> List[Anchor]:
    pts = sorted(points, key=lambda p: p.value)
    out: List[List[Anchor]] = []
    for p in pts:
        if out:
            ref = out[-1][0]
            gap = (p.c0 - ref.c0) + (p.shift - ref.shift)
            if abs(gap) <= CLUSTER_REL * (1.0 + abs(ref.value)):
                out[-1].append(p)
                continue
        out.append([p])
    merged = []
    for group in out:
        order = 1
        for p in group:
            order = order * p.order // math.gcd(order, p.order)
        # prefer the highest-order member as the representative location
        rep = max(group, key=lambda p: p.order)
        merged.append(Anchor(rep.c0, rep.shift, order))
    return merged


def integrate_value_space(
    integrand: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    points: Sequence[Anchor],
    tol: float = 1e-12,
) -> Tuple[float, float]:
    """Integrate ``integrand(c0, shift, offset)`` between the extreme points.

    The integrand is evaluated at ``t = c0 + shift + offset`` with the three
    parts kept separate.  Each gap between neighbouring anchors is cut in the
    middle; each half is parametrised from its own anchor by ``offset = +/- s**M``.
    """
    anchors = _cluster(points)
    if len(anchors) < 2:
        return 0.0, 0.0
    halves = []  # (c0, shift, sign, M, s_max)
    for p, q in zip(anchors[:-1], anchors[1:]):
        gap = (q.c0 - p.c0) + (q.shift - p.shift)
        h = 0.5 * gap
        if h <= 0:
            continue
        halves.append((p.c0, p.shift, 1.0, p.order, h ** (1.0 / p.order)))
        halves.append((q.c0, q.shift, -1.0, q.order, h ** (1.0 / q.order)))
    if not halves:
        return 0.0, 0.0
    c0 = np.array([h[0] for h in halves])
    sh = np.array([h[1] for h in halves])
    sg = np.array([h[2] for h in halves])
    mm = np.array([h[3] for h in halves], dtype=float)
    smax = np.array([h[4] for h in halves])

    def f(ids, s):
        m = mm[ids]
        off = sg[ids] * s**m
        jac = m * s ** (m - 1.0)
        return integrand(c0[ids], sh[ids], off) * jac

    vals, err = adaptive_integrate(f, np.arange(len(halves)), np.zeros(len(halves)), smax, tol)
    return float(vals.sum()), err
