"""Tests for implied volatility inversion and the expansion."""
import math

import numpy as np
import pytest

from fracvol.helpers.errors import DomainError, NoArbitrageError
from fracvol.helpers.stats import loglog_slope
from fracvol.implied_vol import (
    expansion_residual,
    invert_bs,
    iv_asymptotes,
    iv_correction_band,
    iv_expansion,
    iv_lattice,
    iv_mixing_limit,
    mean_iv_surface,
    mixing_equivalent_v3,
    relative_iv_correction,
)
from fracvol.models.hurst import HurstModel
from fracvol.models.option import MarketState, OptionSpec, PayoffKind
from fracvol.pricer import bs_price, bs_put, skew_constants


@pytest.mark.parametrize("sigma", [0.05, 0.2, 0.8])
@pytest.mark.parametrize("strike", [80.0, 100.0, 125.0])
def test_round_trip(sigma, strike):
    """invert_bs(bs_price(sigma)) returns sigma."""
    price = bs_price(0.0, 100.0, strike, 1.0, sigma)
    assert invert_bs(price, 0.0, 100.0, strike, 1.0) == pytest.approx(sigma, abs=1e-10)


def test_round_trip_put():
    """Put quotes invert through parity."""
    price = bs_put(0.0, 90.0, 100.0, 0.5, 0.3)
    assert invert_bs(price, 0.0, 90.0, 100.0, 0.5, PayoffKind.PUT) == pytest.approx(0.3, abs=1e-10)


def test_reference_price():
    """The at-the-money reference price inverts to 20%."""
    assert invert_bs(7.96557, 0.0, 100.0, 100.0, 1.0) == pytest.approx(0.2, abs=1e-5)


def test_lower_band_limit():
    """A price just above intrinsic gives a volatility near zero."""
    sigma = invert_bs(1e-9, 0.0, 100.0, 100.0, 1.0)
    assert 0 < sigma < 1e-9
    assert abs(bs_price(0.0, 100.0, 100.0, 1.0, sigma) - 1e-9) < 1e-12 * 100.0


def test_no_arbitrage_band():
    """Prices outside ((x - K)+, x) are rejected."""
    with pytest.raises(NoArbitrageError):
        invert_bs(19.0, 0.0, 120.0, 100.0, 1.0)
    with pytest.raises(NoArbitrageError):
        invert_bs(100.0, 0.0, 100.0, 100.0, 1.0)
    with pytest.raises(DomainError):
        invert_bs(5.0, 1.0, 100.0, 100.0, 1.0)


def test_at_the_money_expansion(scaled_vol, model):
    """With K = x the log term vanishes."""
    state = MarketState(t=0.0, x=100.0, rho=-0.5)
    spec = OptionSpec(strike=100.0, maturity=0.8)
    point = iv_expansion(state, spec, scaled_vol, model, phi=0.004)
    constants = skew_constants(scaled_vol, model, -0.5)
    tau_rel = 0.8 / constants.tau_bar
    assert point.tau_rel == pytest.approx(tau_rel)
    assert point.delta_iv_random == pytest.approx(0.002 / tau_rel)
    assert point.delta_iv_skew == pytest.approx(constants.a_F * tau_rel ** 0.1)
    assert point.iv_total == pytest.approx(point.sigma_bar * (1 + point.delta_iv))
    assert point.valid


def test_forward_volatility_forms(scaled_vol, model):
    """The root-mean-square forward volatility matches its first-order form."""
    state = MarketState(t=0.0, x=100.0)
    point = iv_expansion(state, OptionSpec(strike=100.0, maturity=1.0), scaled_vol, model, phi=1e-4)
    assert point.rms_forward_vol == pytest.approx(point.first_order_forward_vol, rel=1e-6)
    assert point.iv_total == pytest.approx(point.first_order_forward_vol, rel=1e-12)


def test_expansion_rejects_expiry(scaled_vol, model):
    """The expansion is singular at tau = 0."""
    state = MarketState(t=1.0, x=100.0)
    with pytest.raises(DomainError):
        iv_expansion(state, OptionSpec(strike=100.0, maturity=1.0), scaled_vol, model, phi=0.0)


def test_validity_flag(scaled_vol, model):
    """Short maturities away from the money leave the regime of validity."""
    state = MarketState(t=0.0, x=100.0, rho=-0.9)
    point = iv_expansion(state, OptionSpec(strike=150.0, maturity=1e-4), scaled_vol, model, phi=0.0)
    assert abs(point.delta_iv) > 0.5
    assert not point.valid


def test_caption_value():
    """H=0.6, a_F=0.1, tau = tau_bar, K = x gives dI = 0.1."""
    assert relative_iv_correction(1.0, 0.0, 0.0, 0.1, 0.6) == pytest.approx(0.1)


def test_skew_sign_and_ordering():
    """dI increases with log-moneyness when a_F > 0 and decreases when a_F < 0."""
    tau_rel = np.geomspace(0.01, 10.0, 30)
    curves = [
        relative_iv_correction(tau_rel, math.log(m), 0.0, 0.1, 0.6) for m in (0.9, 1.0, 1.1)
    ]
    assert np.all(curves[0] < curves[1])
    assert np.all(curves[1] < curves[2])
    low = relative_iv_correction(tau_rel, -0.1, 0.0, -0.1, 0.6)
    high = relative_iv_correction(tau_rel, 0.1, 0.0, -0.1, 0.6)
    assert np.all(high < low)


def test_band_slope():
    """The band of dI scales as (tau/tau_bar)^(H-1)."""
    tau_rel = np.geomspace(0.1, 10.0, 12)
    _, spread = iv_correction_band(tau_rel, 0.0, 0.1, 0.04, 0.6)
    assert loglog_slope(tau_rel, spread).slope == pytest.approx(-0.4, abs=1e-10)
    assert spread[0] == pytest.approx(0.02 * 0.1 ** -0.4)


def test_asymptote_slopes(model):
    """Short branch diverges as (tau/tau_bar)^(H-3/2), long branch grows as (tau/tau_bar)^(H-1/2)."""
    short_tau = np.geomspace(1e-4, 1e-3, 8)
    short = iv_asymptotes(model, 0.1, short_tau, 0.05)["short"]
    assert loglog_slope(short_tau, short).slope == pytest.approx(-0.9, abs=1e-10)
    long_tau = np.geomspace(1e2, 1e3, 8)
    long = iv_asymptotes(model, 0.1, long_tau, 0.05)["long"]
    assert loglog_slope(long_tau, long).slope == pytest.approx(0.1, abs=1e-10)
    assert iv_asymptotes(model, 0.1, 1e-3, 0.0)["short"] == 0.0
    assert iv_asymptotes(model, 0.1, 1e-3, 0.05)["short"] == pytest.approx(0.1 * 10 ** 2.7 * 0.05)


def test_mixing_limit():
    """V3 = 0 gives sigma_bar; at the money the level does not depend on tau."""
    assert iv_mixing_limit(0.0, 0.2, 1.0, 0.3) == 0.2
    levels = iv_mixing_limit(0.001, 0.2, np.array([0.1, 1.0, 10.0]), 0.0)
    np.testing.assert_allclose(levels, 0.2 - 0.001 / 0.4)


def test_fractional_expansion_approaches_mixing_limit():
    """Near H = 1/2 the fractional skew matches the mixing shape with V3 = -2 sigma_bar^2 a_F."""
    hurst = 0.5 + 1e-6
    sigma_bar, a_f = 0.25, -0.03
    tau_bar = 2.0 / sigma_bar ** 2
    v3 = mixing_equivalent_v3(a_f, sigma_bar)
    for tau in (0.1, 1.0, 5.0):
        for log_m in (-0.2, 0.0, 0.15):
            fractional = sigma_bar * (1 + relative_iv_correction(tau / tau_bar, log_m, 0.0, a_f, hurst))
            assert fractional == pytest.approx(
                iv_mixing_limit(v3, sigma_bar, tau, log_m), rel=1e-5
            )


def test_expansion_consistency_improves_with_eps(scaled_vol):
    """invert_bs(corrected price) - sigma_bar (1 + dI) shrinks faster than eps^(1-H)."""
    ladder = [0.1, 0.05, 0.025, 0.0125]
    state = MarketState(t=0.0, x=100.0, rho=-0.5)
    spec = OptionSpec(strike=105.0, maturity=1.0)
    residuals = [
        abs(
            expansion_residual(
                state, spec, scaled_vol, HurstModel(H=0.6, eps=eps), phi=0.01 * (eps / 0.1) ** 0.4
            )
        )
        for eps in ladder
    ]
    assert all(b < a for a, b in zip(residuals, residuals[1:]))
    assert loglog_slope(ladder, residuals).slope > 0.4


def test_mean_surface(scaled_vol, model):
    """Surface rows follow the skew sign and the band is symmetric."""
    surface = mean_iv_surface(scaled_vol, model, -0.5, [0.5, 1.0, 2.0], [0.9, 1.0, 1.1])
    mean = surface["mean_iv"].reshape(3, 3)
    assert np.all(np.diff(mean, axis=1) < 0)
    np.testing.assert_allclose(
        surface["iv_plus_sd"] - surface["mean_iv"], surface["mean_iv"] - surface["iv_minus_sd"]
    )
    assert np.all(surface["iv_plus_sd"] > surface["mean_iv"])


def test_lattice_without_history(scaled_vol, model):
    """Without a factor history the lattice reports the mean (phi = 0)."""
    state = MarketState(t=0.0, x=100.0, rho=-0.5)
    points = iv_lattice(state, scaled_vol, model, [90.0, 110.0], [0.5, 1.0, 2.0])
    assert len(points) == 6
    assert all(point.phi == 0.0 for point in points)
    assert points[0].iv_total > points[1].iv_total


def test_lattice_keeps_explicit_phi(scaled_vol, model):
    """An explicit phi reaches every point; phi = 0 matches the history-free lattice."""
    state = MarketState(t=0.0, x=100.0, rho=-0.5)
    mean = iv_lattice(state, scaled_vol, model, [95.0], [0.5, 1.0])
    zero = iv_lattice(state, scaled_vol, model, [95.0], [0.5, 1.0], phi=0.0)
    shifted = iv_lattice(state, scaled_vol, model, [95.0], [0.5, 1.0], phi=0.003)
    assert [point.iv_total for point in zero] == [point.iv_total for point in mean]
    assert all(point.phi == 0.003 for point in shifted)
    assert all(high.iv_total > low.iv_total for high, low in zip(shifted, zero))
