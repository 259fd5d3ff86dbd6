import math

import mpmath
import numpy as np
import pytest
from scipy import stats

from tvkit import (
    InputError,
    MultiPoly,
    Polynomial,
    TrigPolynomial,
    delta3_exact,
    fit_smoothness,
    gaussian_abs_moment,
    grad_star_norm,
    l1_distance,
    standard_gaussian,
    theorem1_bound,
    theorem2_check,
    trig_modulus_experiment,
    vandermonde_system_check,
)
from tvkit.besov import fit_power_law
from tvkit.bounds import (
    MCConfig,
    delta3_linear_bound,
    flattened_trig,
    grad_star_norm_exact,
    max_flatness_order,
    measured_noise_modulus,
)

G = standard_gaussian()
X2 = Polynomial([0, 0, 1])


def test_abs_moment_examples():
    assert gaussian_abs_moment(1.0) == pytest.approx(math.sqrt(2 / math.pi), abs=1e-15)
    assert gaussian_abs_moment(2.0) == pytest.approx(1.0, abs=1e-15)
    assert gaussian_abs_moment(0.5) == pytest.approx(0.822179, abs=1e-6)
    with pytest.raises(InputError):
        gaussian_abs_moment(0.0)


def test_theorem1_bound_reference_values():
    b = theorem1_bound(1, 1, 1, 0.01)
    mp = mpmath.mp
    mp.dps = 40
    C = mpmath.sqrt(2) * (mpmath.sqrt(2 / mp.pi) + mpmath.sqrt(mp.pi / 2))
    assert b.constant_C == pytest.approx(float(C), rel=1e-14)
    # reference values are quoted to about six digits
    assert b.constant_C == pytest.approx(2.900838, abs=1e-5)
    assert b.raw_bound == pytest.approx(0.290084, abs=1e-6)
    assert b.sigma_product == pytest.approx(0.141421, abs=1e-6)
    assert b.sigma_opt == pytest.approx(math.sqrt(0.005), rel=1e-14)
    assert b.clamped_bound == b.raw_bound


def test_theorem1_bound_edge_cases():
    z = theorem1_bound(1, 1, 1, 0.0)
    assert z.clamped_bound == 0.0 and z.degenerate and z.sigma_opt == 0.0
    big = theorem1_bound(10, 10, 1, 1)
    assert big.raw_bound > 2 and big.clamped_bound == 2.0
    with pytest.raises(InputError):
        theorem1_bound(1, 1, 0.0, 0.1)


def test_balancing_sigma_split():
    b = theorem1_bound(2.0, 3.0, 0.5, 0.02)
    # sigma_opt equalises S sigma^alpha with l1 / sigma
    assert 5.0 * b.sigma_opt**0.5 == pytest.approx(0.02 / b.sigma_opt, rel=1e-12)
    assert b.delta1_bound + b.delta2_bound == pytest.approx(5.0 * b.sigma_opt**0.5 * b.abs_moment, rel=1e-12)
    assert b.delta3_bound == pytest.approx(math.sqrt(2 / math.pi) * 0.02 / b.sigma_opt, rel=1e-12)
    assert b.diagnostic_sum <= b.raw_bound


def test_delta3_examples():
    assert delta3_exact(X2, X2, G, 0.3) == 0.0
    c = 0.4
    assert delta3_exact(X2, X2 + Polynomial([c]), G, 0.25) == pytest.approx(
        2 * (2 * stats.norm.cdf(c / 0.5) - 1), abs=1e-10)
    g = Polynomial([0, 0.1, 1])
    v = delta3_exact(X2, g, G, 0.2)
    assert v <= 2 / (0.2 * math.sqrt(2 * math.pi)) * 0.0797885
    rng = np.random.default_rng(0)
    x = rng.standard_normal(2_000_000)
    mc = 2 * (2 * stats.norm.cdf(np.abs(0.1 * x) / 0.4) - 1)
    assert v == pytest.approx(mc.mean(), abs=4 * mc.std() / math.sqrt(x.size))


def test_delta3_dominated_by_linear_bound_random():
    rng = np.random.default_rng(11)
    for _ in range(50):
        f = Polynomial(rng.standard_normal(int(rng.integers(2, 5))))
        g = Polynomial(rng.standard_normal(int(rng.integers(2, 5))))
        s = float(rng.uniform(0.05, 2))
        l1 = l1_distance(f, g, G)
        assert delta3_exact(f, g, G, s) <= delta3_linear_bound(l1, s) + 1e-9


def test_measured_noise_modulus_matches_direct_expectation():
    s = 0.3
    val, err = measured_noise_modulus(X2, G, s)
    from tvkit import shift_modulus

    from scipy import integrate

    # substitute v = t^2 to remove the square-root kink of the modulus at zero shift
    ref, _ = integrate.quad(lambda t: 4 * t * stats.norm.pdf(t * t) * shift_modulus(X2, G, s * t * t), 0, 3.5,
                            limit=200, epsabs=1e-11)
    assert val == pytest.approx(ref, abs=max(err, 1e-5))
    assert err < 1e-3


def test_grad_star_examples():
    x1 = MultiPoly.from_terms([(1.0, (1, 0))])
    half = MultiPoly.from_terms([(0.5, (2, 0)), (0.5, (0, 2))])
    sq = MultiPoly.from_terms([(1.0, (2, 0))])
    assert grad_star_norm(x1) == pytest.approx(1.0, abs=1e-9)
    assert grad_star_norm(half) == pytest.approx(1.0, abs=1e-9)
    assert grad_star_norm(sq) == pytest.approx(2.0, abs=1e-9)
    mixed = MultiPoly.from_terms([(1.0, (2, 1)), (0.5, (0, 3)), (1.0, (1, 1))])
    assert grad_star_norm(mixed) == pytest.approx(grad_star_norm_exact(mixed), rel=1e-4)
    with pytest.raises(InputError):
        grad_star_norm(MultiPoly.from_terms([(1.0, (1,) + (0,) * 6)]))


def test_theorem2_examples():
    f = MultiPoly.from_terms([(1.0, (2,))])
    assert theorem2_check(f, f).rate_point is None
    pts = []
    for d in np.geomspace(1e-3, 1e-1, 6):
        g = MultiPoly.from_terms([(1.0, (2,)), (float(d), (1,))])
        pts.append(theorem2_check(f, g).rate_point)
    x, y = np.array(pts).T
    slope = fit_power_law(np.exp(x), np.exp(y))[0]
    assert slope >= 1 / 3


def test_theorem2_two_dimensional_mc():
    f = MultiPoly.from_terms([(1.0, (2, 0)), (1.0, (0, 2))])
    pts = []
    for k, d in enumerate(np.geomspace(0.1, 1.0, 5)):
        g = MultiPoly.from_terms([(1.0, (2, 0)), (1.0, (0, 2)), (float(d), (1, 0))])
        pts.append(theorem2_check(f, g, MCConfig(400_000, seed=k)).rate_point)
    x, y = np.array(pts).T
    assert fit_power_law(np.exp(x), np.exp(y))[0] >= 1 / 3 - 0.1


def test_vandermonde_examples():
    one = vandermonde_system_check(1)
    assert (one.W, one.Delta) == (1, 1)
    three = vandermonde_system_check(3)
    assert three.W == 120 and three.Delta == 3_110_400
    for n in range(1, 9):
        c = vandermonde_system_check(n)
        assert c.nonzero and c.Delta == c.Delta_dense
    with pytest.raises(InputError):
        vandermonde_system_check(13)


def test_flatness_order():
    assert [max_flatness_order(n) for n in range(1, 5)] == [1, 3, 5, 7]
    f = flattened_trig(2)
    x = 0.0
    assert [abs(f.derivative_value(x, k)) < 1e-12 for k in (1, 2, 3, 4)] == [True, True, True, False]


def test_trig_experiment_examples():
    cos = TrigPolynomial([0, 1])
    fit = fit_smoothness(trig_modulus_experiment(cos, G, np.geomspace(1e-4, 1e-2, 10)))
    assert fit.alpha == pytest.approx(0.5, abs=0.05)
    assert trig_modulus_experiment(TrigPolynomial([0.0], [0, 1]), G, [0.0]).delta_values[0] == 0.0
    flat = fit_smoothness(trig_modulus_experiment(flattened_trig(2), G, np.geomspace(1e-4, 1e-2, 10)))
    assert flat.alpha == pytest.approx(0.25, abs=0.05)
