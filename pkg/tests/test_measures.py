import math

import numpy as np
import pytest
from scipy import stats

from tvkit import (
    InputError,
    Polynomial,
    PushforwardDensity,
    SingularPointError,
    chi,
    density,
    gaussian,
    lebesgue_on,
    monotone_convex_decomposition,
    parse_density,
    preimages,
    pushforward_density,
    restricted,
    standard_gaussian,
)
from tvkit.quadrature import integrate, integrate_value_space

X2 = Polynomial([0, 0, 1])


def test_density_examples():
    assert density(standard_gaussian(), 0.0) == pytest.approx(0.3989423, abs=1e-7)
    assert density(lebesgue_on(0, 1), 0.5) == 1.0
    assert density(lebesgue_on(0, 1), 2.0) == 0.0


def test_gaussian_constants_are_analytic():
    g = gaussian(0.0, 2.0)
    assert g.A == pytest.approx(1 / (2 * math.sqrt(2 * math.pi)))
    assert g.L == pytest.approx(stats.norm.pdf(1.0) / 4.0)


def test_restriction_is_not_renormalised():
    r = restricted(standard_gaussian(), 0, 1)
    assert r.mass == pytest.approx(stats.norm.cdf(1) - 0.5)
    assert density(r, 0.5) == pytest.approx(stats.norm.pdf(0.5))
    assert density(r, 1.5) == 0.0


def test_parse_density_errors():
    assert parse_density("gauss:1,2").params == (1.0, 2.0)
    assert parse_density("chi:3").kind == "chi"
    with pytest.raises(InputError, match="bogus"):
        parse_density("bogus")
    with pytest.raises(InputError, match="'a'"):
        parse_density("lebesgue:a,1")


def test_preimages_examples():
    pieces = monotone_convex_decomposition(X2, (-10, 10))
    assert np.allclose(preimages(X2, pieces, 4.0), [-2, 2])
    assert preimages(X2, pieces, -1.0).size == 0
    f = Polynomial([0, -1, 0, 1])
    got = preimages(f, monotone_convex_decomposition(f, (-3, 3)), 0.0)
    assert np.allclose(sorted(set(np.round(got, 12))), [-1, 0, 1])


def test_pushforward_examples():
    assert pushforward_density(X2, standard_gaussian(), 1.0) == pytest.approx(0.2419707, abs=1e-7)
    x = Polynomial([0, 1])
    for t in (-1.3, 0.0, 2.2):
        assert pushforward_density(x, standard_gaussian(), t) == pytest.approx(stats.norm.pdf(t), rel=1e-12)
    assert pushforward_density(Polynomial([0, 0, 0, 1]), lebesgue_on(0, 1), 1 / 8) == pytest.approx(4 / 3, rel=1e-10)
    with pytest.raises(SingularPointError):
        pushforward_density(X2, standard_gaussian(), 0.0)


@pytest.mark.parametrize("f,model", [
    (X2, standard_gaussian()),
    (Polynomial([0, -1, 0, 1]), standard_gaussian()),
    (Polynomial([0, 0, -1, 0, 1]), gaussian(0.5, 1.5)),
    (Polynomial([0, 0, 0, 1]), lebesgue_on(-1, 2)),
])
def test_mass_conservation(f, model):
    q = PushforwardDensity(f, model)
    total, _ = integrate_value_space(q.evaluate_at, q.special_points(), 1e-12)
    assert total == pytest.approx(model.mass, abs=1e-6)


def test_monotone_density_for_convex_increasing_piece():
    f = Polynomial([0, 0.5, 1, 0.3])  # convex and increasing on [0, 2]
    q = PushforwardDensity(f, lebesgue_on(0, 2))
    t = np.linspace(f(0.0), f(2.0), 200)[1:-1]
    assert np.all(np.diff(q(t)) <= 1e-12)


@pytest.mark.parametrize("t", [0.1, 0.5, 1, 2, 4])
def test_cdf_oracle(t):
    q = PushforwardDensity(X2, standard_gaussian())
    val, _ = integrate(lambda s: q(s * s) * 2 * s, 0.0, math.sqrt(t))
    assert val == pytest.approx(2 * stats.norm.cdf(math.sqrt(t)) - 1, abs=1e-6)


def test_chi_model_matches_scipy():
    m = chi(3)
    x = np.array([0.1, 1.0, 2.5])
    assert np.allclose(m.pdf(x), stats.chi(3).pdf(x), rtol=1e-12)


def test_sampling_is_seeded():
    a = standard_gaussian().sample(np.random.default_rng(1), 5)
    b = standard_gaussian().sample(np.random.default_rng(1), 5)
    assert np.array_equal(a, b)
