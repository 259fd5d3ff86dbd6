import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tvkit import (
    InputError,
    MultiPoly,
    Polynomial,
    TrigPolynomial,
    differentiate,
    evaluate,
    local_order,
    monotone_convex_decomposition,
    parse_multipoly,
    parse_polynomial,
    parse_trig,
    real_roots,
)


def test_evaluate_examples():
    assert evaluate(Polynomial([-1, 0, 1]), 2.0) == 3.0
    assert evaluate(Polynomial([0.0]), 7.5) == 0.0
    assert evaluate(TrigPolynomial([0, 1], [0, 0, 1]), 0.0) == 1.0


def test_multipoly_dimension_mismatch():
    f = MultiPoly.from_terms([(1.0, (2, 0)), (1.0, (0, 2))])
    assert f(np.array([1.0, 2.0])) == pytest.approx(5.0)
    with pytest.raises(InputError):
        f(np.array([1.0, 2.0, 3.0]))


def test_differentiate_examples():
    assert np.allclose(differentiate(Polynomial([0, 0, 0, 1])).coeffs, [0, 0, 3])
    assert differentiate(Polynomial([4.0])).is_zero
    d = differentiate(TrigPolynomial([0.0], [0, 0, 1]))
    x = np.linspace(-3, 3, 7)
    assert np.allclose(d(x), 2 * np.cos(2 * x))


def test_real_roots_examples():
    assert np.allclose(real_roots(Polynomial([-1, 0, 1]), (-10, 10)), [-1, 1])
    assert real_roots(Polynomial([1, 0, 1]), (-10, 10)).size == 0
    assert np.allclose(real_roots(Polynomial([-6, 11, -6, 1]), (0, 10)), [1, 2, 3])
    with pytest.raises(InputError):
        real_roots(Polynomial([0.0]))


def test_decomposition_examples():
    p = monotone_convex_decomposition(Polynomial([0, 0, 0, 1]), (-1, 1))
    assert [(q.a, q.b) for q in p] == [(-1, 0), (0, 1)]
    p = monotone_convex_decomposition(Polynomial([0, 0, 1]), (-2, 2))
    assert [(q.a, q.b) for q in p] == [(-2, 0), (0, 2)]


def test_local_order_examples():
    assert local_order(Polynomial([0, 0, 1]), 0.0) == (2, pytest.approx(1.0))
    assert local_order(Polynomial([0, 0, 0, 0, 3]), 0.0) == (4, pytest.approx(3.0))
    assert local_order(Polynomial([1, 2, 1]), 1.0) == (1, pytest.approx(4.0))


def test_parsers_name_the_bad_token():
    assert np.allclose(parse_polynomial("-6,11,-6,1").coeffs, [-6, 11, -6, 1])
    t = parse_trig("cos=0,1;sin=0,0,0.5")
    assert t.degree == 2
    m = parse_multipoly("1: 2 0; 1: 0 2")
    assert m.dim == 2
    with pytest.raises(InputError, match="'x'"):
        parse_polynomial("1,x,2")
    with pytest.raises(InputError, match="nan"):
        parse_polynomial("1,nan")
    with pytest.raises(InputError, match="tan"):
        parse_trig("tan=1")


@st.composite
def factored(draw):
    k = draw(st.integers(1, 6))
    roots = sorted(draw(st.lists(st.floats(-5, 5), min_size=k, max_size=k)))
    # keep roots well separated so the float product stays a simple-root polynomial
    if any(b - a < 0.05 for a, b in zip(roots, roots[1:])):
        roots = [roots[0] + 0.3 * i for i in range(k)]
    lead = draw(st.sampled_from([1.0, -2.0, 0.5]))
    return roots, Polynomial((lead * np.polynomial.polynomial.polyfromroots(roots)).tolist())


@settings(max_examples=200, deadline=None)
@given(factored())
def test_root_completeness(case):
    roots, f = case
    found = real_roots(f, (-20, 20))
    assert found.size == len(roots)
    assert np.allclose(found, roots, atol=1e-6)


def test_breakpoint_count_on_random_polynomials():
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        m = int(rng.integers(2, 9))
        c = rng.standard_normal(m + 1)
        pieces = monotone_convex_decomposition(Polynomial(c), (-math.inf, math.inf))
        assert len(pieces) - 1 <= 2 * m - 3


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=7).filter(lambda c: abs(c[-1]) > 0.1))
def test_piece_validity(c):
    f = Polynomial(c)
    for p in monotone_convex_decomposition(f, (-3, 3)):
        x = np.linspace(p.a, p.b, 22)[1:-1]
        d1, d2 = f.deriv()(x), f.deriv().deriv()(x)
        scale1 = 1e-9 * max(1.0, np.max(np.abs(d1)))
        scale2 = 1e-9 * max(1.0, np.max(np.abs(d2)))
        assert np.all(d1 >= -scale1) or np.all(d1 <= scale1)
        assert np.all(d2 >= -scale2) or np.all(d2 <= scale2)


def test_decomposition_of_trig_map():
    f = TrigPolynomial([0, 1], [0, 0, 0.5])
    pieces = monotone_convex_decomposition(f, (-4, 4))
    for p in pieces:
        x = np.linspace(p.a, p.b, 22)[1:-1]
        d1 = f.deriv()(x)
        assert np.all(d1 > 0) or np.all(d1 < 0)


def test_finite_difference_consistency():
    rng = np.random.default_rng(5)
    for _ in range(100):
        f = Polynomial(rng.standard_normal(int(rng.integers(1, 8))))
        g = TrigPolynomial(rng.standard_normal(4), [0.0] + list(rng.standard_normal(3)))
        x = float(rng.uniform(-2, 2))
        h = 1e-5
        for fn in (f, g):
            fd = (evaluate(fn, x + h) - evaluate(fn, x - h)) / (2 * h)
            ex = evaluate(differentiate(fn), x)
            assert fd == pytest.approx(ex, rel=1e-6, abs=1e-7)
