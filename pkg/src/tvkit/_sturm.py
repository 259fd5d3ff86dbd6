"""Exact real-root isolation for polynomials with dyadic (float) coefficients.

Floats are exact dyadic rationals, so the coefficient vector of a float
polynomial can be lifted to ``Fraction`` without loss.  The Sturm chain of the
square-free part is then exact and root counts are never wrong; only the final
refinement of an isolated simple root happens in floating point.

Polynomials here are ascending lists of ``Fraction`` (``p[k]`` multiplies x**k).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Sequence

from scipy.optimize import brentq

RPoly = List[Fraction]


def trim(p: Sequence[Fraction]) -> RPoly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def from_floats(coeffs: Sequence[float]) -> RPoly:
    return trim([Fraction(float(c)) for c in coeffs])


def deriv(p: RPoly) -> RPoly:
    return trim([k * p[k] for k in range(1, len(p))])


def mul(a: RPoly, b: RPoly) -> RPoly:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return trim(out)


def add(a: RPoly, b: RPoly) -> RPoly:
    n = max(len(a), len(b))
    return trim([(a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0) for k in range(n)])


def scale(a: RPoly, c) -> RPoly:
    return trim([x * c for x in a])


def divmod_poly(num: RPoly, den: RPoly) -> tuple[RPoly, RPoly]:
    num = list(num)
    den = trim(den)
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    dd = len(den) - 1
    lead = den[-1]
    if len(num) - 1 < dd:
        return [], trim(num)
    quot = [Fraction(0)] * (len(num) - dd)
    for k in range(len(num) - 1, dd - 1, -1):
        c = num[k] / lead
        quot[k - dd] = c
        if c:
            for j in range(dd + 1):
                num[k - dd + j] -= c * den[j]
    return trim(quot), trim(num[:dd])


def gcd_poly(a: RPoly, b: RPoly) -> RPoly:
    a, b = trim(a), trim(b)
    while b:
        _, r = divmod_poly(a, b)
        a, b = b, r
    if not a:
        return a
    lead = a[-1]
    return [c / lead for c in a]


def square_free(p: RPoly) -> RPoly:
    g = gcd_poly(p, deriv(p))
    if len(g) <= 1:
        return trim(p)
    q, r = divmod_poly(p, g)
    assert not r
    return q


def primitive_int(p: RPoly) -> List[int]:
    """Positive rescaling of ``p`` to coprime integers (signs are preserved)."""
    if not p:
        return []
    den = 1
    for c in p:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in p]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    return [c // g for c in ints]


def sign_at(p: Sequence[int], x: Fraction) -> int:
    """Sign of the integer polynomial ``p`` at the rational ``x``."""
    if not p:
        return 0
    n, d = x.numerator, x.denominator
    # d**deg * p(n/d) = sum_k p_k n^k d^(deg-k), evaluated Horner-style
    acc = p[-1]
    dpow = 1
    for c in reversed(p[:-1]):
        dpow *= d
        acc = acc * n + c * dpow
    return (acc > 0) - (acc < 0)


def sturm_chain(p: RPoly) -> List[List[int]]:
    chain = [trim(p), deriv(p)]
    while chain[-1]:
        _, r = divmod_poly(chain[-2], chain[-1])
        if not r:
            break
        chain.append(scale(r, -1))
    return [primitive_int(q) for q in chain if q]


def variations(chain: List[List[int]], x: Fraction) -> int:
    count = 0
    last = 0
    for q in chain:
        s = sign_at(q, x)
        if s == 0:
            continue
        if last and s != last:
            count += 1
        last = s
    return count


def cauchy_bound(p: RPoly) -> float:
    p = trim(p)
    if len(p) <= 1:
        return 1.0
    lead = abs(p[-1])
    return 1.0 + float(max(abs(c) for c in p[:-1]) / lead)


def _horner_float(coeffs: Sequence[float], x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def isolate_real_roots(p: RPoly, lo: float, hi: float, cluster_tol: float) -> List[float]:
    """Distinct real roots of ``p`` in the closed interval ``[lo, hi]``.

    Counting is exact (Sturm chain of the square-free part).  Intervals that
    still hold several roots once narrower than ``cluster_tol`` are reported
    as a single merged root at their midpoint.
    """
    p = trim(p)
    if not p:
        raise ValueError("identically zero polynomial")
    if len(p) == 1:
        return []
    sf = square_free(p)
    chain = sturm_chain(sf)
    sf_int = chain[0]
    sf_float = [float(c) for c in sf]
    dsf_float = [k * sf_float[k] for k in range(1, len(sf_float))]

    a0, b0 = Fraction(lo), Fraction(hi)
    roots: List[float] = []
    if sign_at(sf_int, a0) == 0:
        roots.append(float(a0))
    stack = [(a0, b0, variations(chain, a0), variations(chain, b0))]
    while stack:
        a, b, va, vb = stack.pop()
        count = va - vb
        if count <= 0:
            continue
        if float(b - a) < cluster_tol:
            roots.append(float((a + b) / 2))
            continue
        if count == 1:
            roots.append(_refine(chain, sf_int, sf_float, dsf_float, a, b, va))
            continue
        c = (a + b) / 2
        vc = variations(chain, c)
        stack.append((c, b, vc, vb))
        stack.append((a, c, va, vc))
    roots.sort()
    return roots


def _refine(chain, sf_int, sf_float, dsf_float, a: Fraction, b: Fraction, va: int) -> float:
    """Refine the unique root of the square-free part in ``(a, b]``."""
    if sign_at(sf_int, b) == 0:
        return float(b)
    # move ``a`` off a neighbouring root so that a strict sign change brackets
    while sign_at(sf_int, a) == 0:
        c = (a + b) / 2
        if sign_at(sf_int, c) == 0:
            return float(c)
        vc = variations(chain, c)
        if va - vc >= 1:
            b = c
        else:
            a, va = c, vc
    af, bf = float(a), float(b)
    fa, fb = _horner_float(sf_float, af), _horner_float(sf_float, bf)
    if fa == 0.0:
        return af
    if fb == 0.0:
        return bf
    if fa * fb > 0:
        # float rounding hides the sign change; bisect on exact signs instead
        sa = sign_at(sf_int, a)
        while float(b - a) > 4e-16 * max(abs(af), abs(bf), 1e-300):
            c = (a + b) / 2
            sc = sign_at(sf_int, c)
            if sc == 0:
                return float(c)
            if sc == sa:
                a = c
            else:
                b = c
            af, bf = float(a), float(b)
        return float((a + b) / 2)
    width = max(abs(af), abs(bf), 1.0)
    x = brentq(lambda t: _horner_float(sf_float, t), af, bf, xtol=1e-16 * width, rtol=8.9e-16, maxiter=500)
    # one Newton polish step on the simple root, kept only if it stays inside the bracket
    d = _horner_float(dsf_float, x)
    if d != 0.0:
        y = x - _horner_float(sf_float, x) / d
        if af <= y <= bf and abs(_horner_float(sf_float, y)) <= abs(_horner_float(sf_float, x)):
            x = y
    return x
