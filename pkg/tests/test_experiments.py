import numpy as np
import pytest

from tvkit import InputError, Polynomial
from tvkit.experiments import experiment_suites, radial, run_suite, theorem1_audit, vandermonde


def test_suite_names():
    assert sorted(experiment_suites()) == ["gauss-poly", "radial", "theorem1-audit", "trig-poly", "vandermonde"]
    with pytest.raises(InputError):
        run_suite("missing")


def test_vandermonde_suite():
    rep = vandermonde(8)
    assert rep.passed
    assert [r["nonzero"] for r in rep.rows] == [True] * 8
    assert rep.series["log10_Delta"][0] == (1, 0.0)


def test_audit_example_pair():
    f = Polynomial([0, 0, 1])
    rep = theorem1_audit(ms=(), extra_pairs=[(f, f + Polynomial([0.01]))], mc_samples=200_000, seed=4)
    (row,) = rep.rows
    assert row["tv_le_sum"] and row["sum_le_clamped"] and row["mc_agrees"]
    assert row["tv"] <= row["delta_sum"] <= row["clamped_bound"]
    assert rep.passed


def test_radial_three_dimensional_identity():
    rep = radial(cases=((3, 1),), mc_samples=200_000, u_grid=tuple(np.geomspace(1e-4, 1e-2, 10)))
    row = rep.rows[0]
    assert row["fitted_alpha"] == pytest.approx(1.0, abs=0.1)
    assert rep.passed


def test_gauss_poly_reports_slack():
    rep = run_suite("gauss-poly", m=3, deltas=tuple(np.geomspace(1e-4, 1e-1, 6)))
    assert all(r["slack"] >= -1e-9 for r in rep.rows)
    s = rep.slopes["log_tv_vs_log_delta"]
    assert s["stderr"] >= 0 and s["points"] == 6
    assert rep.to_dict()["experiment"] == "gauss-poly"
    assert "wall_clock" not in rep.to_dict()
