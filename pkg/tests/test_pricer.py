"""Tests for Black-Scholes Greeks and the corrected price."""
import dataclasses
import itertools
import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from fracvol.fou_core import kernel_l2_mass
from fracvol.fou_sampler import FouSampler, sample_paths
from fracvol.helpers.errors import DomainError
from fracvol.models.hurst import HurstModel
from fracvol.models.option import MarketState, OptionSpec, PayoffKind
from fracvol.pricer import (
    bs_price,
    bs_put,
    correction_band,
    corrected_price,
    greeks,
    normalized_correction,
    phi_correction,
    sigma_phi_squared,
    skew_constants,
)
from fracvol.vol_model import VolFunction

LATTICE = list(
    itertools.product([80.0, 90.0, 100.0, 110.0, 125.0], [0.25, 0.5, 1.0, 2.0], [0.1, 0.2, 0.3, 0.4, 0.5])
)


@pytest.fixture(scope="module")
def flat_path(model):
    """Return a path whose stored history is identically zero."""
    path = sample_paths(model, model.eps / 20 * np.arange(3), 1, seed=0)[0]
    return dataclasses.replace(
        path, dW=np.zeros_like(path.dW), unresolved=np.zeros_like(path.unresolved)
    )


def test_bs_price_at_the_money():
    """x = K = 100, sigma = 0.2, tau = 1 gives 100 (2 Phi(0.1) - 1)."""
    expected = 100.0 * (2.0 * stats.norm.cdf(0.1) - 1.0)
    assert bs_price(0.0, 100.0, 100.0, 1.0, 0.2) == pytest.approx(expected, rel=1e-13)
    assert bs_price(0.0, 100.0, 100.0, 1.0, 0.2) == pytest.approx(7.96557, abs=1e-5)


def test_bs_price_intrinsic_and_parity():
    """Intrinsic value at expiry and zero-rate put-call parity."""
    assert bs_price(1.0, 120.0, 100.0, 1.0, 0.2) == 20.0
    assert bs_price(1.0, 80.0, 100.0, 1.0, 0.2) == 0.0
    call = bs_price(0.0, 90.0, 100.0, 0.5, 0.3)
    put = bs_put(0.0, 90.0, 100.0, 0.5, 0.3)
    assert call - put == pytest.approx(90.0 - 100.0, abs=1e-12)
    assert greeks(1.0, 120.0, 100.0, 1.0, 0.2) == {
        "delta": 1.0,
        "gamma_x2": 0.0,
        "vega": 0.0,
        "skew_greek": 0.0,
    }


def test_bs_price_domain():
    """Negative time to maturity and non-positive inputs are rejected."""
    with pytest.raises(DomainError):
        bs_price(1.0, 100.0, 100.0, 0.5, 0.2)
    with pytest.raises(DomainError):
        bs_price(0.0, -1.0, 100.0, 1.0, 0.2)
    with pytest.raises(DomainError):
        bs_price(0.0, 100.0, 100.0, 1.0, 0.0)


@pytest.mark.parametrize("x,tau,sigma", LATTICE)
def test_greek_identities_closed_form(x, tau, sigma):
    """Vega = tau sigma x^2 C_xx and x d_x vega = (1/2 + log(K/x)/(sigma^2 tau)) vega."""
    strike = 100.0
    values = greeks(0.0, x, strike, tau, sigma)
    assert values["vega"] == pytest.approx(tau * sigma * values["gamma_x2"], rel=1e-10)
    factor = 0.5 + math.log(strike / x) / (sigma ** 2 * tau)
    assert tau * sigma * values["skew_greek"] == pytest.approx(factor * values["vega"], rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("x,tau,sigma", LATTICE)
def test_greeks_finite_differences(x, tau, sigma):
    """Closed-form Greeks agree with central differences."""
    strike = 100.0
    values = greeks(0.0, x, strike, tau, sigma)
    step = 1e-4 * x

    def price(spot, vol=sigma):
        return bs_price(0.0, spot, strike, tau, vol)

    second = (price(x + step) - 2 * price(x) + price(x - step)) / step ** 2
    assert x * x * second == pytest.approx(values["gamma_x2"], rel=1e-4, abs=1e-6)
    vega = (price(x, sigma + 1e-5) - price(x, sigma - 1e-5)) / 2e-5
    assert vega == pytest.approx(values["vega"], rel=1e-4, abs=1e-6)
    up = greeks(0.0, x + step, strike, tau, sigma)["gamma_x2"]
    down = greeks(0.0, x - step, strike, tau, sigma)["gamma_x2"]
    assert x * (up - down) / (2 * step) == pytest.approx(values["skew_greek"], rel=1e-4, abs=1e-6)


def test_skew_constants_zero_rho(erf_vol, model):
    """Without leverage the skew factor vanishes."""
    assert skew_constants(erf_vol, model, 0.0).a_F == 0.0


def test_skew_constants_independent_derivation(erf_vol):
    """a_F composed from raw Gamma evaluations."""
    model = HurstModel(H=0.6, eps=0.01)
    rho = -0.5
    moments = erf_vol.moments
    sigma_ou = math.sqrt(1.0 / (2.0 * math.sin(math.pi * 0.6)))
    tau_bar = 2.0 / moments.sigma_bar_sq
    expected = (
        0.01 ** 0.4
        * moments.sigma_tilde
        * sigma_ou
        * rho
        * moments.ff_prime
        * tau_bar ** 0.6
        / (2 * math.sqrt(2) * math.sqrt(moments.sigma_bar_sq) * special.gamma(2.1))
    )
    constants = skew_constants(erf_vol, model, rho)
    assert constants.a_F == pytest.approx(expected, rel=1e-12)
    assert constants.a_F < 0
    assert constants.tau_bar == pytest.approx(tau_bar)
    assert constants.theta_of_tau(1.0) == pytest.approx(constants.theta_bar)
    assert constants.d_of_tau(4.0) == pytest.approx(constants.d_bar * 4.0 ** 1.1)


def test_sigma_phi_closed_form(erf_vol, model):
    """sigma_phi^2 = sigma_ou^2 <FF'>^2 (sigma_H^2 - 1/(2H Gamma(H+1/2)^2))."""
    ff_prime = erf_vol.moments.ff_prime
    expected = model.sigma_ou_sq * ff_prime ** 2 * (
        model.sigma_H_sq - 1.0 / (2 * 0.6 * special.gamma(1.1) ** 2)
    )
    assert sigma_phi_squared(erf_vol, model) == pytest.approx(expected, rel=1e-12)
    assert skew_constants(erf_vol, model, -0.3).sigma_phi ** 2 == pytest.approx(expected, rel=1e-12)


def test_sigma_phi_vanishes_at_half():
    """The random correction disappears as H decreases to 1/2."""
    hurst = 0.5 + 1e-7
    func = VolFunction.from_dict({"kind": "erf"}, hurst)
    model = HurstModel(H=hurst, eps=0.1)
    scale = model.sigma_ou_sq * func.moments.ff_prime ** 2
    assert sigma_phi_squared(func, model) < 1e-5 * scale


def test_price_at_expiry(erf_vol, model):
    """At t = T the corrected price is the payoff."""
    state = MarketState(t=1.0, x=120.0, rho=-0.5)
    result = corrected_price(state, OptionSpec(strike=100.0, maturity=1.0), erf_vol, model)
    assert result.total == 20.0
    assert result.skew_term == 0.0


def test_price_without_corrections(scaled_vol, model):
    """rho = 0 and phi = 0 reduce to Black-Scholes at sigma_bar."""
    state = MarketState(t=0.0, x=100.0, rho=0.0)
    spec = OptionSpec(strike=105.0, maturity=1.0)
    result = corrected_price(state, spec, scaled_vol, model, phi=0.0)
    expected = bs_price(0.0, 100.0, 105.0, 1.0, scaled_vol.moments.sigma_bar)
    assert result.total == pytest.approx(expected, rel=1e-14)
    assert result.skew_term == 0.0


def test_constant_vol_has_no_correction(model, flat_path):
    """A constant volatility gives phi = 0 and no skew."""
    func = VolFunction.constant(0.2, 0.6)
    state = MarketState(t=flat_path.grid[-1], x=100.0, rho=-0.7, path=flat_path)
    spec = OptionSpec(strike=100.0, maturity=state.t + 1.0)
    result = corrected_price(state, spec, func, model)
    assert result.random_term == pytest.approx(0.0, abs=1e-14)
    assert result.skew_term == pytest.approx(0.0, abs=1e-14)
    assert result.total == pytest.approx(bs_price(0.0, 100.0, 100.0, 1.0, 0.2), rel=1e-12)


@pytest.mark.parametrize("moneyness", [0.5, 0.8, 1.0, 1.25, 2.0])
@pytest.mark.parametrize("tau_rel", [0.01, 0.1, 1.0, 3.0, 10.0])
def test_dual_forms_agree(scaled_vol, model, moneyness, tau_rel):
    """Greek form and normalized form of the correction agree to 1e-10."""
    state = MarketState(t=0.0, x=100.0, rho=-0.5)
    tau_bar = scaled_vol.moments.tau_bar
    spec = OptionSpec(strike=100.0 * moneyness, maturity=tau_rel * tau_bar)
    result = corrected_price(state, spec, scaled_vol, model, phi=0.013)
    greek_form = (result.random_term + result.skew_term) / spec.strike
    assert result.normalized == pytest.approx(greek_form, rel=1e-10, abs=1e-15)


def test_put_call_parity_of_corrected_prices(scaled_vol, model):
    """Corrections act identically on calls and puts."""
    state = MarketState(t=0.0, x=95.0, rho=-0.4)
    call = corrected_price(state, OptionSpec(strike=100.0, maturity=0.7), scaled_vol, model, phi=0.02)
    put = corrected_price(
        state,
        OptionSpec(strike=100.0, maturity=0.7, payoff=PayoffKind.PUT),
        scaled_vol,
        model,
        phi=0.02,
    )
    assert call.total - put.total == pytest.approx(95.0 - 100.0, abs=1e-12)


def test_table_payoff_replicates_call_spread(scaled_vol, model):
    """A piecewise-linear call spread prices as the difference of two calls."""
    state = MarketState(t=0.0, x=100.0, rho=-0.4)
    points = [[50.0, 0.0], [95.0, 0.0], [105.0, 10.0], [200.0, 10.0]]
    spread = corrected_price(
        state,
        OptionSpec(strike=100.0, maturity=1.0, payoff=PayoffKind.TABLE, points=points),
        scaled_vol,
        model,
        phi=0.01,
    )
    low = corrected_price(state, OptionSpec(strike=95.0, maturity=1.0), scaled_vol, model, phi=0.01)
    high = corrected_price(state, OptionSpec(strike=105.0, maturity=1.0), scaled_vol, model, phi=0.01)
    assert spread.total == pytest.approx(low.total - high.total, rel=1e-12)
    assert spread.normalized is None


def test_correction_figure_shape():
    """Mean correction humps at tau/tau_bar = 4H and orders by moneyness."""
    tau_rel = np.linspace(0.05, 1.0, 40)
    curves = [normalized_correction(tau_rel, m, 0.0, 0.1, 0.6) for m in (0.9, 1.0, 1.1)]
    assert np.all(curves[0] < curves[1])
    assert np.all(curves[1] < curves[2])
    fine = np.linspace(0.5, 6.0, 2201)
    at_the_money = normalized_correction(fine, 1.0, 0.0, 0.1, 0.6)
    assert np.all(at_the_money > 0)
    assert fine[np.argmax(at_the_money)] == pytest.approx(2.4, abs=5e-3)


def test_correction_band():
    """The band is the phi term at amplitude (tau/tau_bar)^H."""
    mean, spread = correction_band(0.5, 1.1, 0.1, 0.04, 0.6)
    assert mean == pytest.approx(normalized_correction(0.5, 1.1, 0.0, 0.1, 0.6))
    expected = normalized_correction(0.5, 1.1, 0.04 * 0.5 ** 0.6, 0.0, 0.6)
    assert spread == pytest.approx(expected, rel=1e-14)


def test_phi_empty_interval(erf_vol, model, flat_path):
    """phi vanishes at t = T."""
    state = MarketState(t=flat_path.grid[-1], x=100.0, path=flat_path)
    assert phi_correction(state, OptionSpec(strike=100.0, maturity=state.t), erf_vol, model) == 0.0


def test_phi_flat_history_against_nested_quadrature(erf_vol, model, flat_path):
    """With zero history phi integrates <G> at the shrunken conditional variance."""
    t = flat_path.grid[-1]
    tau = 0.5
    state = MarketState(t=t, x=100.0, path=flat_path)
    value = phi_correction(state, OptionSpec(strike=100.0, maturity=t + tau), erf_vol, model)
    z_grid = np.linspace(-10.0, 10.0, 4001)
    density = stats.norm.pdf(z_grid)

    def inner(lag):
        spread = model.sigma_ou * math.sqrt(kernel_l2_mass(lag / model.eps, model.H))
        return np.trapz(erf_vol.G(spread * z_grid) * density, z_grid)

    oracle, _ = integrate.quad(inner, 0.0, tau, epsabs=1e-10, limit=200)
    assert value == pytest.approx(oracle, abs=1e-6)
    linear = phi_correction(
        state, OptionSpec(strike=100.0, maturity=t + tau), erf_vol, model, method="linear"
    )
    assert linear == 0.0


@pytest.mark.timeout(600)
def test_phi_ensemble_statistics(erf_vol):
    """eps^(2H-2) Var(phi) / tau^2H approaches sigma_phi^2; phi is centered and Gaussian."""
    model = HurstModel(H=0.6, eps=0.01)
    sampler = FouSampler(model, model.eps / 20 * np.arange(2))
    spec = OptionSpec(strike=100.0, maturity=sampler.grid[-1] + 1.0)
    values = np.array(
        [
            phi_correction(
                MarketState(t=sampler.grid[-1], x=100.0, path=sampler.sample_one(8, index)),
                spec,
                erf_vol,
                model,
            )
            for index in range(800)
        ]
    )
    stderr = values.std(ddof=1) / math.sqrt(values.size)
    assert abs(values.mean()) < 3 * stderr
    ratio = model.eps ** (2 * model.H - 2) * values.var(ddof=1) / sigma_phi_squared(erf_vol, model)
    assert ratio == pytest.approx(1.0, abs=0.25)
    assert stats.normaltest(values).pvalue > 0.01


def test_phi_rejects_foreign_history(erf_vol, model, flat_path):
    """The factor history must come from the pricing model."""
    state = MarketState(t=flat_path.grid[-1], x=100.0, path=flat_path)
    spec = OptionSpec(strike=100.0, maturity=state.t + 0.5)
    with pytest.raises(DomainError):
        phi_correction(state, spec, erf_vol, HurstModel(H=model.H, eps=2 * model.eps))
    with pytest.raises(DomainError):
        corrected_price(state, spec, erf_vol, HurstModel(H=model.H, eps=model.eps / 2))
