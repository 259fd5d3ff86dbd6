"""Maps f, g: univariate, trigonometric and multivariate polynomials.

Coefficient conventions
-----------------------
``Polynomial`` stores coefficients in *ascending* order, ``coeffs[k]``
multiplies ``x**k``.  Texts that index a degree-m polynomial as
``sum a_k x**(m-k)`` (descending) map to ``coeffs[m-k] = a_k``.

``TrigPolynomial`` stores ``sum_k cos_coeffs[k] cos(kx) + sin_coeffs[k] sin(kx)``
with ``sin_coeffs[0] == 0``.

The decomposition into monotone convex/concave pieces breaks the domain at
every real root of f' and f''.  Each piece remembers its *base*: the endpoint
where |f'| is smallest.  Reflecting the piece about its base turns f into a
convex increasing function starting at 0, and the local order (m, K) with
``f(x) - f(base) ~ K |x - base|**m`` is measured there.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple, Union

import numpy as np

from . import _sturm
from .errors import InputError

# roots of f' and f'' closer than this (times the Cauchy bound) are merged
CLUSTER_REL_TOL = 1e-9
# Taylor coefficients below this (times the largest one) count as vanishing
ORDER_REL_TOL = 1e-12


class Polynomial:
    """Real univariate polynomial, ascending coefficients, trailing zeros trimmed."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Sequence[float]):
        c = np.asarray(coeffs, dtype=float).ravel()
        if c.size and not np.all(np.isfinite(c)):
            raise InputError("polynomial coefficients must be finite")
        nz = np.nonzero(c)[0]
        c = c[: nz[-1] + 1] if nz.size else np.zeros(0)
        c.setflags(write=False)
        self._c = c

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        # the zero polynomial reports degree 0 as well; use ``is_zero`` to tell them apart
        return max(self._c.size - 1, 0)

    @property
    def is_zero(self) -> bool:
        return self._c.size == 0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x)
        for c in self._c[::-1]:
            acc = acc * x + c
        return acc if acc.ndim else float(acc)

    def deriv(self) -> "Polynomial":
        if self._c.size <= 1:
            return Polynomial([])
        return Polynomial(self._c[1:] * np.arange(1, self._c.size))

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial([other])
        n = max(self._c.size, other._c.size)
        a = np.zeros(n)
        a[: self._c.size] += self._c
        a[: other._c.size] += other._c
        return Polynomial(a)

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial([other])
        return self + Polynomial(-other._c)

    def __neg__(self):
        return Polynomial(-self._c)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial(self._c * other)
        if self.is_zero or other.is_zero:
            return Polynomial([])
        return Polynomial(np.convolve(self._c, other._c))

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Polynomial) and np.array_equal(self._c, other._c)

    def __hash__(self):
        return hash(self._c.tobytes())

    def __repr__(self):
        return f"Polynomial({self._c.tolist()})"

    def exact(self) -> List[Fraction]:
        return _sturm.from_floats(self._c)

    def shift_argument(self, u: float) -> "Polynomial":
        """The polynomial ``x -> f(x - u)``."""
        return Polynomial(self.taylor(-u))

    def taylor(self, x0: float, kmax: int | None = None) -> np.ndarray:
        """Coefficients ``c`` with ``f(x0 + y) = sum c_k y**k``, computed exactly."""
        p = self.exact()
        x = Fraction(float(x0))
        n = len(p)
        # repeated synthetic division by (y - x0)
        work = list(p)
        out = []
        for k in range(n):
            acc = Fraction(0)
            for j in range(len(work) - 1, -1, -1):
                acc = acc * x + work[j]
                work[j] = acc
            out.append(work[0])
            work = work[1:]
        c = np.array([float(v) for v in out]) if out else np.zeros(0)
        if kmax is not None:
            c = np.concatenate([c, np.zeros(max(0, kmax + 1 - c.size))])[: kmax + 1]
        return c

    def cauchy_bound(self) -> float:
        if self.is_zero:
            raise InputError("Cauchy bound of the zero polynomial")
        return _sturm.cauchy_bound(self.exact())

    def describe(self) -> str:
        return "poly:" + ",".join(_fmt(c) for c in self._c)


class TrigPolynomial:
    """``sum_k a_k cos(kx) + b_k sin(kx)`` for k = 0..n."""

    __slots__ = ("_a", "_b")

    def __init__(self, cos_coeffs: Sequence[float], sin_coeffs: Sequence[float] = ()):
        a = np.asarray(cos_coeffs, dtype=float).ravel()
        b = np.asarray(sin_coeffs, dtype=float).ravel()
        if b.size and b[0] != 0.0:
            raise InputError("sin coefficient at k=0 must be exactly 0")
        n = max(a.size, b.size, 1)
        a = np.concatenate([a, np.zeros(n - a.size)])
        b = np.concatenate([b, np.zeros(n - b.size)])
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InputError("trigonometric coefficients must be finite")
        nz = np.nonzero((a != 0) | (b != 0))[0]
        top = nz[-1] + 1 if nz.size else 1
        a, b = a[:top].copy(), b[:top].copy()
        a.setflags(write=False)
        b.setflags(write=False)
        self._a, self._b = a, b

    @property
    def cos_coeffs(self) -> np.ndarray:
        return self._a

    @property
    def sin_coeffs(self) -> np.ndarray:
        return self._b

    @property
    def degree(self) -> int:
        return self._a.size - 1

    @property
    def is_zero(self) -> bool:
        return not (np.any(self._a) or np.any(self._b))

    def __call__(self, x):
        return self.derivative_value(x, 0)

    def derivative_value(self, x, order: int):
        """Value of the ``order``-th derivative at ``x`` (vectorised)."""
        x = np.asarray(x, dtype=float)
        k = np.arange(self._a.size)
        # Re sum (a_k - i b_k) (ik)^order e^{ikx}
        coef = (self._a - 1j * self._b) * (1j * k) ** order
        phase = np.exp(1j * np.multiply.outer(x, k))
        out = (phase @ coef).real
        return out if out.ndim else float(out)

    def deriv(self) -> "TrigPolynomial":
        k = np.arange(self._a.size)
        return TrigPolynomial(k * self._b, -k * self._a)

    def taylor(self, x0: float, kmax: int) -> np.ndarray:
        j = np.arange(kmax + 1)
        vals = np.array([self.derivative_value(x0, int(i)) for i in j])
        return vals / np.array([math.factorial(int(i)) for i in j], dtype=float)

    def half_angle_numerator(self) -> List[Fraction]:
        """Exact polynomial N(t) with ``f(x) (1+t^2)^n = N(t)``, ``t = tan(x/2)``.

        Uses ``e^{ikx} = (1+it)^{2k} / (1+t^2)^k``.
        """
        n = self.degree
        one_plus_t2 = [Fraction(1), Fraction(0), Fraction(1)]
        total: List[Fraction] = []
        for k in range(n + 1):
            a, b = Fraction(float(self._a[k])), Fraction(float(self._b[k]))
            if a == 0 and b == 0:
                continue
            # (1 + i t)^{2k} as separate real / imaginary integer coefficient lists
            re = [Fraction(0)] * (2 * k + 1)
            im = [Fraction(0)] * (2 * k + 1)
            for j in range(2 * k + 1):
                c = math.comb(2 * k, j)
                r = j % 4  # i^j
                if r == 0:
                    re[j] = Fraction(c)
                elif r == 1:
                    im[j] = Fraction(c)
                elif r == 2:
                    re[j] = Fraction(-c)
                else:
                    im[j] = Fraction(-c)
            term = _sturm.add(_sturm.scale(re, a), _sturm.scale(im, b))
            for _ in range(n - k):
                term = _sturm.mul(term, one_plus_t2)
            total = _sturm.add(total, term)
        return total

    def exact_value_at_pi(self) -> Fraction:
        return sum((Fraction(float(a)) * (-1) ** k for k, a in enumerate(self._a)), Fraction(0))

    def __eq__(self, other):
        return (
            isinstance(other, TrigPolynomial)
            and np.array_equal(self._a, other._a)
            and np.array_equal(self._b, other._b)
        )

    def __hash__(self):
        return hash((self._a.tobytes(), self._b.tobytes()))

    def __repr__(self):
        return f"TrigPolynomial(cos={self._a.tolist()}, sin={self._b.tolist()})"

    def describe(self) -> str:
        return "trig:cos=" + ",".join(_fmt(c) for c in self._a) + ";sin=" + ",".join(_fmt(c) for c in self._b)


@dataclass(frozen=True)
class MultiPoly:
    """Polynomial in d variables as a list of ``(coefficient, exponents)`` terms."""

    terms: Tuple[Tuple[float, Tuple[int, ...]], ...]
    dim: int

    def __post_init__(self):
        merged: dict = {}
        for coef, exps in self.terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.dim:
                raise InputError(f"exponent vector {exps} does not have length {self.dim}")
            if any(e < 0 for e in exps):
                raise InputError("exponents must be non-negative")
            merged[exps] = merged.get(exps, 0.0) + float(coef)
        terms = tuple(sorted(((c, e) for e, c in merged.items() if c != 0.0), key=lambda t: t[1]))
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_terms(cls, terms, dim: int | None = None) -> "MultiPoly":
        terms = [(float(c), tuple(e)) for c, e in terms]
        if dim is None:
            if not terms:
                raise InputError("dimension needed for an empty MultiPoly")
            dim = len(terms[0][1])
        return cls(tuple(terms), dim)

    @property
    def degree(self) -> int:
        return max((sum(e) for _, e in self.terms), default=0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise InputError(f"point dimension {x.shape[-1]} does not match polynomial dimension {self.dim}")
        out = np.zeros(x.shape[:-1])
        for c, e in self.terms:
            term = np.full(x.shape[:-1], c)
            for i, p in enumerate(e):
                if p:
                    term = term * x[..., i] ** p
            out = out + term
        return out if out.ndim else float(out)

    def partial(self, i: int) -> "MultiPoly":
        terms = []
        for c, e in self.terms:
            if e[i] > 0:
                e2 = list(e)
                e2[i] -= 1
                terms.append((c * e[i], tuple(e2)))
        return MultiPoly(tuple(terms), self.dim)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        if other.dim != self.dim:
            raise InputError("dimension mismatch")
        return MultiPoly(self.terms + tuple((-c, e) for c, e in other.terms), self.dim)

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        if other.dim != self.dim:
            raise InputError("dimension mismatch")
        return MultiPoly(self.terms + other.terms, self.dim)

    def degree_in(self, i: int) -> int:
        return max((e[i] for _, e in self.terms), default=0)

    def as_polynomial_in(self, i: int, others: np.ndarray) -> np.ndarray:
        """Coefficients (ascending in x_i) with the other coordinates fixed.

        ``others`` has shape (N, d) (column i ignored); returns shape (N, deg_i + 1).
        """
        deg = self.degree_in(i)
        out = np.zeros((others.shape[0], deg + 1))
        for c, e in self.terms:
            term = np.full(others.shape[0], c)
            for j, p in enumerate(e):
                if j != i and p:
                    term = term * others[:, j] ** p
            out[:, e[i]] += term
        return out

    def describe(self) -> str:
        return "multi:" + ";".join(_fmt(c) + ":" + " ".join(str(p) for p in e) for c, e in self.terms)


Map1D = Union[Polynomial, TrigPolynomial]


@dataclass(frozen=True)
class MonotonePiece:
    """Interval on which f is strictly monotone and convex or concave.

    ``base`` is the endpoint with the smaller |f'|; ``local_order_m`` and
    ``local_constant_K`` describe ``|f(x) - f(base)| ~ K |x - base|**m`` there.
    """

    a: float
    b: float
    direction: str  # "increasing" | "decreasing"
    shape: str  # "convex" | "concave"
    local_order_m: int
    local_constant_K: float
    base: float
    tail: bool = False

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def base_is_left(self) -> bool:
        return self.base == self.a


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


# ---------------------------------------------------------------------------
# operations


def evaluate(f, x):
    """Evaluate a Polynomial, TrigPolynomial or MultiPoly at ``x``."""
    if isinstance(f, MultiPoly):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != f.dim:
            raise InputError(f"expected points of dimension {f.dim}")
        return f(x)
    return f(x)


def differentiate(f: Map1D) -> Map1D:
    return f.deriv()


def real_roots(f: Polynomial, interval: Tuple[float, float] = (-math.inf, math.inf)) -> np.ndarray:
    """Sorted distinct real roots of ``f`` in the closed ``interval``.

    Infinite endpoints are replaced by the Cauchy root bound.
    """
    if f.is_zero:
        raise InputError("real_roots of the identically zero polynomial")
    lo, hi = map(float, interval)
    if not lo < hi:
        raise InputError(f"empty interval [{lo}, {hi}]")
    if f.degree == 0:
        return np.zeros(0)
    bound = f.cauchy_bound()
    lo_s, hi_s = max(lo, -bound), min(hi, bound)
    if lo_s > hi_s:
        return np.zeros(0)
    roots = _sturm.isolate_real_roots(f.exact(), lo_s, hi_s, CLUSTER_REL_TOL * bound)
    return np.asarray(_merge_close(roots, CLUSTER_REL_TOL * bound))


def _merge_close(xs: Sequence[float], tol: float) -> List[float]:
    out: List[float] = []
    for x in sorted(xs):
        if out and x - out[-1] <= tol:
            continue
        out.append(x)
    return out


def trig_real_roots(f: TrigPolynomial, interval: Tuple[float, float]) -> np.ndarray:
    """Distinct real roots of a trigonometric polynomial in a finite interval.

    Roots in (-pi, pi) come from the exact half-angle numerator; x = pi is
    tested exactly; the rest follow by periodicity.
    """
    lo, hi = map(float, interval)
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise InputError("trigonometric roots need a finite, non-empty interval")
    if f.is_zero:
        raise InputError("real roots of the identically zero trigonometric polynomial")
    num = f.half_angle_numerator()
    base: List[float] = []
    if len(num) > 1:
        bound = _sturm.cauchy_bound(num)
        ts = _sturm.isolate_real_roots(num, -bound, bound, 1e-13 * bound)
        base.extend(2.0 * math.atan(t) for t in ts)
    if f.exact_value_at_pi() == 0:
        base.append(math.pi)
    two_pi = 2.0 * math.pi
    out = []
    for x0 in base:
        k_lo = math.ceil((lo - x0) / two_pi)
        k_hi = math.floor((hi - x0) / two_pi)
        out.extend(x0 + k * two_pi for k in range(k_lo, k_hi + 1))
    return np.asarray(_merge_close(out, 1e-12 * max(1.0, hi - lo)))


def _roots_of(f: Map1D, lo: float, hi: float) -> np.ndarray:
    if isinstance(f, TrigPolynomial):
        return trig_real_roots(f, (lo, hi))
    return real_roots(f, (lo, hi))


def local_order(f: Map1D, piece_start: float, toward: str = "right", known_critical: bool = False) -> Tuple[int, float]:
    """Leading order ``(m, K)`` of ``f(x) - f(a) ~ K |x - a|**m`` near ``a``.

    ``m`` is the index of the first non-vanishing derivative at ``a`` and
    ``K = |f^(m)(a)| / m!``.  ``known_critical`` forces f'(a) = 0 (for points
    obtained as roots of f').  ``toward`` is accepted for symmetry with the
    one-sided definition; (m, K) do not depend on it.
    """
    if toward not in ("left", "right"):
        raise InputError("toward must be 'left' or 'right'")
    kmax = f.degree if isinstance(f, Polynomial) else 4 * f.degree + 4
    if kmax < 1 or f.is_zero:
        raise InputError("local order of a constant map")
    c = f.taylor(piece_start, kmax)
    scale = float(np.max(np.abs(c[1:]))) if c.size > 1 else 0.0
    for k in range(1, kmax + 1):
        if k == 1 and known_critical:
            continue
        if c[k] != 0.0 and abs(c[k]) > ORDER_REL_TOL * scale:
            return k, abs(float(c[k]))
    raise RuntimeError(f"all derivatives up to order {kmax} vanish at {piece_start}; map is constant")


def monotone_convex_decomposition(f: Map1D, domain: Tuple[float, float]) -> List[MonotonePiece]:
    """Split ``domain`` at the roots of f' and f'' into monotone convex/concave pieces."""
    lo, hi = map(float, domain)
    if not lo < hi:
        raise InputError(f"empty domain [{lo}, {hi}]")
    if isinstance(f, Polynomial) and f.degree < 1:
        raise InputError("decomposition needs a polynomial of degree >= 1")
    if isinstance(f, TrigPolynomial) and (f.degree < 1 or f.deriv().is_zero):
        raise InputError("decomposition needs a non-constant trigonometric polynomial")
    d1, d2 = f.deriv(), f.deriv().deriv()

    if isinstance(f, Polynomial):
        prod = d1 * d2 if not d2.is_zero else d1
        reach = (prod.cauchy_bound() if prod.degree >= 1 else 0.0) + 1.0
        lo_s, hi_s = max(lo, -reach), min(hi, reach)
        merge_tol = CLUSTER_REL_TOL * f.cauchy_bound()
    else:
        lo_s, hi_s = lo, hi
        merge_tol = 1e-12 * max(1.0, hi - lo)

    crit = [float(x) for x in _roots_of(d1, lo_s, hi_s)] if lo_s < hi_s else []
    infl = [float(x) for x in _roots_of(d2, lo_s, hi_s)] if (lo_s < hi_s and not d2.is_zero) else []
    points = sorted([(x, True) for x in crit] + [(x, False) for x in infl])
    merged: List[Tuple[float, bool]] = []
    for x, is_crit in points:
        if merged and x - merged[-1][0] <= merge_tol:
            px, pc = merged[-1]
            # a critical point wins the position so that f'(base) is exactly its root
            merged[-1] = (x if is_crit and not pc else px, pc or is_crit)
            continue
        merged.append((x, is_crit))
    interior = [(x, c) for x, c in merged if lo < x < hi]
    critical_at = {x for x, c in interior if c}
    # domain ends that are themselves roots of f'
    for end in (lo, hi):
        if math.isfinite(end) and any(abs(end - x) <= merge_tol for x in crit):
            critical_at.add(end)

    edges = [lo] + [x for x, _ in interior] + [hi]
    pieces = []
    for a, b in zip(edges[:-1], edges[1:]):
        if math.isfinite(a) and math.isfinite(b):
            mid = 0.5 * (a + b)
        elif math.isfinite(a):
            mid = a + 1.0
        elif math.isfinite(b):
            mid = b - 1.0
        else:
            mid = 0.0
        s1, s2 = float(d1(mid)), float(d2(mid))
        direction = "increasing" if s1 > 0 else "decreasing"
        shape = "concave" if s2 < 0 else "convex"
        if a in critical_at:
            base = a
        elif b in critical_at:
            base = b
        elif (shape == "convex") == (direction == "increasing"):
            base = a
        else:
            base = b
        if not math.isfinite(base):
            base = b if base == a else a
        if not math.isfinite(base):
            base = 0.0
        m, K = local_order(f, base, "right" if base == a else "left", known_critical=base in critical_at)
        pieces.append(
            MonotonePiece(a, b, direction, shape, m, K, base, tail=not (math.isfinite(a) and math.isfinite(b)))
        )
    return pieces


# ---------------------------------------------------------------------------
# text formats

_MINUS = str.maketrans({"−": "-", "–": "-"})


def _parse_floats(text: str, what: str) -> List[float]:
    parts = [p.strip() for p in text.translate(_MINUS).split(",")]
    out = []
    for p in parts:
        try:
            v = float(p)
        except ValueError:
            raise InputError(f"cannot parse {what} coefficient {p!r}") from None
        if not math.isfinite(v):
            raise InputError(f"{what} coefficient {p!r} is not finite")
        out.append(v)
    return out


def parse_polynomial(text: str) -> Polynomial:
    """``"-6,11,-6,1"`` -> x**3 - 6x**2 + 11x - 6 (ascending coefficients)."""
    if not text or not text.strip():
        raise InputError("empty polynomial spec")
    return Polynomial(_parse_floats(text, "polynomial"))


def parse_trig(text: str) -> TrigPolynomial:
    """``"cos=0,1;sin=0,0,0.5"`` -> cos x + 0.5 sin 2x."""
    fields = {}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        key, sep, val = chunk.partition("=")
        key = key.strip().lower()
        if not sep or key not in ("cos", "sin"):
            raise InputError(f"cannot parse trigonometric spec token {chunk!r}")
        fields[key] = _parse_floats(val, key)
    if not fields:
        raise InputError("empty trigonometric spec")
    return TrigPolynomial(fields.get("cos", [0.0]), fields.get("sin", [0.0]))


def parse_multipoly(text: str) -> MultiPoly:
    """Lines (or ``;``-separated terms) of the form ``"coeff: e1 e2 ... ed"``."""
    terms = []
    for line in re.split(r"[;\n]", text):
        line = line.strip()
        if not line:
            continue
        coef, sep, exps = line.partition(":")
        if not sep:
            raise InputError(f"cannot parse multivariate term {line!r}")
        try:
            c = float(coef.translate(_MINUS))
            e = tuple(int(tok) for tok in exps.split())
        except ValueError:
            raise InputError(f"cannot parse multivariate term {line!r}") from None
        terms.append((c, e))
    if not terms:
        raise InputError("empty multivariate spec")
    dims = {len(e) for _, e in terms}
    if len(dims) != 1:
        raise InputError("all exponent vectors must have the same length")
    return MultiPoly.from_terms(terms)
