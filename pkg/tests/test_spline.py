import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import designs, jittered_design, log_lams
from oracles import dense_fit_values, evaluate_interpolant, simpson
from robustspline.errors import DesignError, InputError, NumericalError, RegimeWarning
from robustspline.spline import (
    DesignPoints,
    SmoothingParams,
    diagnostics,
    evaluate,
    fit,
    roughness,
    NaturalCubicSpline,
)


def test_design_rejects_duplicates_and_disorder():
    with pytest.raises(DesignError, match="duplicate"):
        DesignPoints([0.1, 0.2, 0.2, 0.3], (0, 1))
    with pytest.raises(DesignError, match="decreasing"):
        DesignPoints([0.1, 0.3, 0.2], (0, 1))
    with pytest.raises(DesignError):
        DesignPoints([0.1, 0.2], (0, 1))
    with pytest.raises(DesignError):
        DesignPoints([0.1, 0.2, 1.5], (0, 1))


def test_design_quasi_uniformity():
    d = DesignPoints([0.25, 0.5, 0.75], (0, 1))
    assert d.delta_min == pytest.approx(0.25)
    assert d.delta_max == pytest.approx(0.25)
    assert d.quasi_uniformity == pytest.approx(1.0)


def test_smoothing_params_validation():
    with pytest.raises(InputError):
        SmoothingParams(0.0)
    with pytest.raises(InputError):
        SmoothingParams(float("nan"))
    assert SmoothingParams(0.01).penalty_scale(50) == pytest.approx(0.5)
    assert not SmoothingParams(1e-5).in_regime(100)
    assert SmoothingParams(1e-3).in_regime(100)


def test_regime_warning():
    d = DesignPoints(np.linspace(0.1, 0.9, 10), (0, 1))
    with pytest.warns(RegimeWarning):
        fit(d, np.zeros(10), 1e-4)


def test_fit_input_errors():
    d = DesignPoints(np.linspace(0.1, 0.9, 10), (0, 1))
    with pytest.raises(InputError):
        fit(d, np.zeros(9), 0.1)
    y = np.zeros(10)
    y[3] = np.inf
    with pytest.raises(InputError):
        fit(d, y, 0.1)


def test_degenerate_spacing_breaks_down():
    x = (np.arange(200) + 0.5) / 200
    x[101] = x[100] + 1e-8
    with pytest.raises(NumericalError):
        fit(DesignPoints(x, (0, 1)), np.sin(x), 200 ** -0.8)


@pytest.mark.parametrize("lam", [1e-8, 1e-3, 1.0, 1e6])
def test_constant_reproduced(lam, rng):
    d = jittered_design(rng, 17)
    s = fit(d, np.full(17, 3.5), lam)
    np.testing.assert_allclose(s.values, 3.5, atol=1e-9)
    assert roughness(s) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("lam", [1e-8, 1e-3, 1.0, 1e6])
def test_line_reproduced(lam, rng):
    d = jittered_design(rng, 23)
    s = fit(d, 2 * d.x + 1, lam)
    np.testing.assert_allclose(s.values, 2 * d.x + 1, atol=1e-9)
    t = np.linspace(-0.5, 1.5, 41)
    np.testing.assert_allclose(s(t), 2 * t + 1, atol=1e-9)


def test_matches_dense_oracle_n12():
    rng = np.random.default_rng(12)
    x = np.sort(rng.uniform(0, 1, 12))
    y = rng.normal(size=12)
    s = fit(DesignPoints(x, (0, 1)), y, 0.01)
    np.testing.assert_allclose(s.values, dense_fit_values(x, y, 0.01), atol=1e-7)


@settings(max_examples=60, deadline=None)
@given(design=designs(), lam=log_lams, seed=st.integers(0, 2**32 - 1))
def test_oracle_equivalence_property(design, lam, seed):
    y = np.random.default_rng(seed).normal(size=design.n)
    s = fit(design, y, lam)
    np.testing.assert_allclose(s.values, dense_fit_values(design.x, y, lam), atol=1e-7)


def test_natural_boundary_and_continuity(rng):
    d = jittered_design(rng, 15)
    s = fit(d, rng.normal(size=15), 1e-3)
    assert s.second_derivs[0] == 0.0 and s.second_derivs[-1] == 0.0
    eps = 1e-9
    for xi in d.x[1:-1]:
        for order, tol in ((0, 1e-6), (1, 1e-5), (2, 1e-3)):
            assert evaluate(s, xi - eps, order) == pytest.approx(evaluate(s, xi + eps, order), abs=tol)


def test_evaluate_at_knots_and_outside(rng):
    d = jittered_design(rng, 12)
    s = fit(d, rng.normal(size=12), 1e-2)
    for i in range(12):
        assert evaluate(s, d.x[i]) == s.values[i]
    assert evaluate(s, d.x[0] - 0.3, 2) == 0.0
    assert evaluate(s, d.x[-1] + 0.3, 2) == 0.0
    # linear continuation uses the boundary slope
    assert evaluate(s, d.x[0] - 0.1) == pytest.approx(s.values[0] - 0.1 * evaluate(s, d.x[0], 1))
    with pytest.raises(InputError):
        evaluate(s, np.nan)
    with pytest.raises(InputError):
        evaluate(s, 0.5, 3)


def test_evaluate_midpoint_matches_oracle():
    rng = np.random.default_rng(12)
    x = np.sort(rng.uniform(0, 1, 12))
    y = rng.normal(size=12)
    s = fit(DesignPoints(x, (0, 1)), y, 0.01)
    mids = 0.5 * (x[:-1] + x[1:])
    oracle_values = dense_fit_values(x, y, 0.01)
    np.testing.assert_allclose(s(mids), evaluate_interpolant(x, oracle_values, mids), atol=1e-7)


def test_derivatives_against_finite_differences(rng):
    d = jittered_design(rng, 20)
    s = fit(d, np.sin(6 * d.x), 1e-5)
    t = np.linspace(0.05, 0.95, 37)
    h = 1e-5
    np.testing.assert_allclose(s(t, 1), (s(t + h) - s(t - h)) / (2 * h), atol=1e-5)
    np.testing.assert_allclose(s(t, 2), (s(t + h, 1) - s(t - h, 1)) / (2 * h), atol=1e-4)


def test_roughness_single_spike():
    x = np.linspace(0.1, 0.9, 9)
    h = x[1] - x[0]
    gamma = np.zeros(9)
    gamma[4] = 2.0
    s = NaturalCubicSpline(DesignPoints(x, (0, 1)), np.zeros(9), gamma)
    assert roughness(s) == pytest.approx(2 * h / 3 * 4.0)


def test_roughness_matches_simpson():
    rng = np.random.default_rng(3)
    x = np.sort(rng.uniform(0, 1, 25))
    s = fit(DesignPoints(x, (0, 1)), rng.normal(size=25), 1e-4)
    t = np.linspace(0, 1, 10001)
    assert roughness(s) == pytest.approx(simpson(s(t, 2) ** 2, 0, 1), rel=1e-6)


def test_diagnostics_objective(rng):
    d = jittered_design(rng, 30)
    y = rng.normal(size=30)
    s = fit(d, y, 0.05)
    diag = diagnostics(s, y, 0.05)
    assert diag.objective == pytest.approx(diag.residual_mse + 0.05 * diag.roughness, rel=1e-15)


def test_interpolation_limit(rng):
    for n in (5, 8, 12):
        d = jittered_design(rng, n)
        y = rng.normal(size=n)
        s = fit(d, y, 1e-12)
        assert diagnostics(s, y, 1e-12).residual_mse <= 1e-10
    # for larger n the residual is not yet below 1e-10 at lam = 1e-12 but
    # vanishes like lam^2
    for n in (20, 35, 50):
        d = jittered_design(rng, n)
        y = rng.normal(size=n)
        mse = [diagnostics(fit(d, y, lam), y, lam).residual_mse for lam in (1e-12, 1e-13, 1e-14)]
        assert mse[0] / mse[1] == pytest.approx(100, rel=0.05)
        assert mse[1] / mse[2] == pytest.approx(100, rel=0.05)
        assert diagnostics(fit(d, y, 1e-15), y, 1e-15).residual_mse <= 1e-10


def test_smoothing_limit(rng):
    d = jittered_design(rng, 30)
    y = rng.normal(size=30)
    s = fit(d, y, 1e9)
    coef = np.polyfit(d.x, y, 1)
    assert np.abs(s.values - np.polyval(coef, d.x)).max() <= 1e-6


def test_monotone_in_lambda(rng):
    d = jittered_design(rng, 40)
    y = np.sin(5 * d.x) + rng.normal(scale=0.3, size=40)
    mse, rough = [], []
    for lam in np.logspace(-8, 2, 25):
        s = fit(d, y, lam)
        diag = diagnostics(s, y, lam)
        mse.append(diag.residual_mse)
        rough.append(diag.roughness)
    assert np.all(np.diff(mse) >= -1e-12)
    assert np.all(np.diff(rough) <= 1e-9 * max(rough))


def test_minimises_objective(rng):
    d = jittered_design(rng, 15)
    y = rng.normal(size=15)
    lam = 1e-3
    s = fit(d, y, lam)
    best = diagnostics(s, y, lam).objective
    # perturbing the knot values (natural interpolant through them) never helps
    from robustspline.spline import _solve

    for _ in range(20):
        g = s.values + rng.normal(scale=1e-3, size=15)
        _, gamma = _solve(d, g, 0.0)  # p = 0: natural interpolant of g
        other = NaturalCubicSpline(d, g, gamma)
        assert diagnostics(other, y, lam).objective >= best - 1e-12
