"""Tests for the volatility function, its moments and Hermite expansion."""
import math

import numpy as np
import pytest
from scipy import special, stats

from fracvol.fou_core import fou_correlation
from fracvol.helpers.errors import ConfigValidationError, DomainError
from fracvol.models.hurst import HurstModel
from fracvol.models.vol_function import VolKind, VolSpec
from fracvol.vol_model import (
    VolFunction,
    erf_hermite_coefficients,
    evaluate,
    evaluate_deriv,
    geometric_decay_ratio,
    hermite_autocovariance,
    hermite_coefficients,
    moments,
    psi,
    vol_autocovariance,
)


def test_logistic_values(logistic_vol):
    """Midpoint and saturation of the logistic map."""
    assert evaluate(logistic_vol, 0.0) == pytest.approx(0.275, abs=1e-15)
    assert evaluate(logistic_vol, 60.0) == pytest.approx(0.5, abs=1e-12)
    assert evaluate(logistic_vol, -60.0) == pytest.approx(0.05, abs=1e-12)


def test_erf_value_at_zero(erf_vol):
    """F(0) is the square root of half the Gaussian mass 2 sqrt(pi)."""
    assert evaluate(erf_vol, 0.0) == pytest.approx(math.sqrt(math.sqrt(math.pi)), rel=1e-14)


@pytest.mark.parametrize("kind", [VolKind.ERF, VolKind.SINC_SQUARED, VolKind.LOGISTIC])
def test_derivative_matches_finite_difference(kind):
    """Analytic derivatives agree with central differences."""
    func = VolFunction(VolSpec(kind=kind), 0.6)
    grid = np.linspace(-2.0, 2.0, 21)
    step = 1e-5
    numeric = (func(grid + step) - func(grid - step)) / (2 * step)
    np.testing.assert_allclose(evaluate_deriv(func, grid), numeric, rtol=1e-6, atol=1e-9)


def test_constant_table_moments(model):
    """A degenerate constant table has zero derivative moments."""
    func = VolFunction.constant(0.2, 0.6)
    result = moments(func, model)
    assert result.sigma_bar_sq == pytest.approx(0.04, abs=1e-12)
    assert result.sigma_tilde == pytest.approx(0.2, abs=1e-12)
    assert result.ff_prime == pytest.approx(0.0, abs=1e-14)


def test_constant_table_requires_flag():
    """A constant table is rejected without the test flag."""
    with pytest.raises(ConfigValidationError):
        VolFunction(VolSpec(kind=VolKind.TABLE, params={"z": [0, 1], "sigma": [0.2, 0.2]}), 0.6)


def test_table_rejects_non_monotone():
    """Table values must be increasing."""
    spec = VolSpec(kind=VolKind.TABLE, params={"z": [-1, 0, 1], "sigma": [0.2, 0.3, 0.25]})
    with pytest.raises(ConfigValidationError) as exc:
        VolFunction(spec, 0.6)
    assert exc.value.field == "vol.params.sigma"


def test_table_interpolates_and_clamps(model):
    """Monotone cubic interpolation with clamping outside the knots."""
    spec = VolSpec(
        kind=VolKind.TABLE, params={"z": [-1.0, 0.0, 1.0, 2.0], "sigma": [0.1, 0.2, 0.3, 0.35]}
    )
    func = VolFunction(spec, 0.6)
    assert evaluate(func, 0.0) == pytest.approx(0.2)
    assert evaluate(func, -5.0) == pytest.approx(0.1)
    assert evaluate(func, 5.0) == pytest.approx(0.35)
    assert evaluate_deriv(func, 5.0) == 0.0
    result = moments(func, model)
    assert 0.1 < result.sigma_tilde < 0.35
    assert result.sigma_tilde ** 2 < result.sigma_bar_sq


def test_unknown_kind():
    """Unknown kinds are named in the validation error."""
    with pytest.raises(ConfigValidationError) as exc:
        VolFunction.from_dict({"kind": "cubic"}, 0.6)
    assert exc.value.field == "vol.kind"


def test_logistic_moments_jensen(logistic_vol, model):
    """<F>^2 < <F^2> for a non-constant F."""
    result = moments(logistic_vol, model)
    assert result.sigma_tilde ** 2 < result.sigma_bar_sq
    assert result.f_prime > 0
    assert result.f_prime_sq > result.f_prime ** 2


def test_erf_mean_square(erf_vol, model):
    """<F^2> = E[F~(X)] = sqrt(pi), also against a trapezoid oracle."""
    result = moments(erf_vol, model)
    assert result.sigma_bar_sq == pytest.approx(math.sqrt(math.pi), abs=1e-10)
    grid = np.linspace(-10.0, 10.0, 200001)
    oracle = np.trapz(erf_vol.tilde(grid) * stats.norm.pdf(grid), grid)
    assert result.sigma_bar_sq == pytest.approx(oracle, abs=1e-8)


def test_sinc_squared_mean_square(model):
    """The odd parts of F~ average out, leaving pi/2."""
    func = VolFunction.from_dict({"kind": "sinc-squared"}, 0.6)
    assert moments(func, model).sigma_bar_sq == pytest.approx(math.pi / 2, abs=1e-9)


def test_moments_reject_other_hurst(erf_vol):
    """Moments are bound to the exponent the function was built with."""
    with pytest.raises(DomainError):
        moments(erf_vol, HurstModel(H=0.7, eps=0.1))


@pytest.mark.parametrize("fixture", ["erf_vol", "logistic_vol"])
def test_ff_prime_identity(fixture, request):
    """<FF'> = C_1 / (2 sigma_ou) by Gaussian integration by parts."""
    func = request.getfixturevalue(fixture)
    expansion = hermite_coefficients(func, 4)
    assert func.moments.ff_prime == pytest.approx(
        expansion.coefficients[1] / (2 * func.sigma_ou), abs=1e-10
    )


def test_c0_is_mean_square(erf_vol):
    """C_0 = <F^2>."""
    assert hermite_coefficients(erf_vol, 2).coefficients[0] == pytest.approx(
        erf_vol.moments.sigma_bar_sq, abs=1e-10
    )


def test_hermite_of_hermite_polynomial():
    """F~ = He_2 has C_2 = 2! and nothing else."""
    expansion = hermite_coefficients(lambda w: w * w - 1.0, 6)
    expected = [0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0]
    np.testing.assert_allclose(expansion.coefficients, expected, atol=1e-10)


def test_erf_hermite_closed_form(erf_vol):
    """Quadrature coefficients match the closed form."""
    expansion = hermite_coefficients(erf_vol, 30)
    exact = erf_hermite_coefficients(30)
    scale = np.exp(-0.5 * special.gammaln(np.arange(31) + 1.0))
    np.testing.assert_allclose(expansion.normalized, exact * scale, atol=1e-12)


def test_erf_hermite_geometric_bound(erf_vol):
    """C_k^2/k! <= K 3^-k with K fixed by the first order."""
    normalized = np.asarray(hermite_coefficients(erf_vol, 30).normalized)
    orders = np.arange(31)
    bound = 2.0 * 3.0 ** -orders[1:]
    assert np.all(normalized[1:] ** 2 <= bound * (1 + 1e-9))
    fit = geometric_decay_ratio(hermite_coefficients(erf_vol, 30))
    assert math.exp(fit.slope) < 1 / 2.5


def test_logistic_hermite_decay(logistic_vol):
    """The logistic expansion decays faster than 2.5^-k."""
    fit = geometric_decay_ratio(hermite_coefficients(logistic_vol, 30))
    assert math.exp(fit.slope) < 1 / 2.5


def test_parseval(logistic_vol):
    """sum_k C_k^2/k! approaches E[F~^2]."""
    expansion = hermite_coefficients(logistic_vol, 40)
    assert expansion.parseval_sum == pytest.approx(expansion.second_moment, rel=1e-10)


def test_autocovariance_variance_case(erf_vol, model):
    """The zero lag returns Var(F) exactly."""
    assert vol_autocovariance(erf_vol, model, 0.0) == erf_vol.moments.variance


def test_psi_properties(erf_vol):
    """Psi(0) = 0, Psi increasing and bounded by the variance."""
    assert psi(erf_vol, 0.0) == pytest.approx(0.0, abs=1e-12)
    grid = np.linspace(0.0, 0.99, 34)
    values = np.array([psi(erf_vol, c) for c in grid])
    assert np.all(np.diff(values) > 0)
    assert np.all(values <= erf_vol.moments.variance + 1e-12)
    assert psi(erf_vol, 0.5) == pytest.approx(hermite_autocovariance(erf_vol, 0.5), abs=1e-9)


def test_autocovariance_long_range_tail(erf_vol, model):
    """Psi(C_Z(s/eps)) ~ sigma_ou^2 <F'>^2 (s/eps)^(2H-2) / Gamma(2H-1)."""
    lag = 100 * model.eps
    expected = (
        model.sigma_ou_sq
        * erf_vol.moments.f_prime ** 2
        * 100 ** (2 * 0.6 - 2)
        / special.gamma(2 * 0.6 - 1)
    )
    assert vol_autocovariance(erf_vol, model, lag) == pytest.approx(expected, rel=0.05)
    assert fou_correlation(100.0, 0.6) > 0
