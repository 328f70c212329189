"""Tests for the Monte Carlo oracle."""
import logging
import math

import numpy as np
import pytest
from scipy import integrate

from fracvol.constants import ENV_THREADS
from fracvol.fou_core import kernel
from fracvol.fou_sampler import conditional_std
from fracvol.helpers.errors import ConfigValidationError, InsufficientDataError
from fracvol.helpers.stats import SlopeFit
from fracvol.mc_oracle import (
    ForwardFactor,
    convergence_study,
    convergence_verdict,
    forward_covariance,
    history_path,
    ladder_difference_variance,
    martingale_check,
    mc_price,
    moment_study,
    payoff_values,
)
from fracvol.models.hurst import HurstModel
from fracvol.models.monte_carlo import MCConfig, Verdict
from fracvol.models.option import MarketState, OptionSpec, PayoffKind
from fracvol.pricer import bs_price, corrected_price
from fracvol.vol_model import VolFunction


def small_config(**kwargs):
    """Return a quick configuration."""
    values = {"n_paths": 4000, "steps_per_eps": 20, "seed": 5, "batch_size": 1000}
    values.update(kwargs)
    return MCConfig(**values)


def fit(slope, ci_low, ci_high):
    """Return a slope fit with the given interval."""
    return SlopeFit(
        slope=slope, intercept=0.0, stderr=0.1, ci_low=ci_low, ci_high=ci_high, n_points=4
    )


def test_config_validation():
    """Too few paths and odd antithetic counts are rejected with the field named."""
    with pytest.raises(ConfigValidationError) as err:
        MCConfig(n_paths=10).validate()
    assert err.value.field == "mc.n_paths"
    with pytest.raises(ConfigValidationError):
        MCConfig(n_paths=1001).validate()
    with pytest.raises(ConfigValidationError):
        MCConfig(eps_ladder=[0.1, -0.05]).validate()
    MCConfig(n_paths=1001, antithetic=False).validate()
    assert MCConfig.from_dict({"scheme": "log-euler"}).scheme.value == "log-euler"


def test_payoff_values():
    """Vectorized payoffs follow the static replication."""
    x = np.array([80.0, 100.0, 120.0])
    np.testing.assert_allclose(payoff_values(OptionSpec(100.0, 1.0), x), [0.0, 0.0, 20.0])
    put = OptionSpec(100.0, 1.0, payoff=PayoffKind.PUT)
    np.testing.assert_allclose(payoff_values(put, x), [20.0, 0.0, 0.0])


def test_forward_covariance_against_quadrature(model):
    """Entries equal sigma_ou^2 int_0^x K(w) K(w + d) dw."""
    step = model.eps / 20
    cov = forward_covariance(model, step, 6)
    np.testing.assert_allclose(cov, cov.T)
    assert cov[0, 0] == pytest.approx(conditional_std(model, step) ** 2, rel=1e-10)

    def integrand(w):
        return kernel(w, model.H) * kernel(w + 0.1, model.H)

    expected = model.sigma_ou_sq * integrate.quad(integrand, 0.0, 0.15, limit=200)[0]
    assert cov[2, 4] == pytest.approx(expected, rel=1e-6)


def test_forward_factor_moments(model):
    """Zero shocks give the conditional mean; the spread matches the conditional law."""
    path = history_path(model, 0.0, seed=2)
    factor = ForwardFactor(path, 0.0, 40, model.eps / 20)
    assert factor.means[0] == pytest.approx(path.z[-1], abs=1e-9)
    zero = factor.sample(np.zeros((1, 40)), np.zeros((1, 39)))
    np.testing.assert_allclose(zero[0], factor.means)
    rng = np.random.Generator(np.random.Philox(11))
    n = 20000
    draws = factor.sample(rng.standard_normal((n, 40)), rng.standard_normal((n, 39)))
    assert np.all(draws[:, 0] == factor.means[0])
    spread = draws[:, -1] - factor.means[-1]
    expected = conditional_std(model, 39 * model.eps / 20) ** 2
    assert abs(spread.var() - expected) < 4 * expected * math.sqrt(2 / n)


@pytest.mark.timeout(300)
def test_constant_volatility_gives_black_scholes():
    """A constant F degenerates to Black-Scholes."""
    flat = VolFunction.constant(0.2, 0.6)
    model = HurstModel(H=0.6, eps=0.1)
    state = MarketState(t=0.0, x=100.0, rho=-0.5)
    result = mc_price(state, OptionSpec(strike=105.0, maturity=0.5), flat, model, small_config())
    expected = bs_price(0.0, 100.0, 105.0, 0.5, 0.2)
    assert abs(result.estimate - expected) < 3 * result.stderr
    assert result.n_paths == 4000


@pytest.mark.timeout(300)
def test_parity_and_martingale(scaled_vol, model):
    """Call minus put equals the forward path by path, and E[X_T] = X_t."""
    state = MarketState(t=0.0, x=100.0, rho=0.0)
    cfg = small_config()
    call = mc_price(state, OptionSpec(strike=100.0, maturity=0.5), scaled_vol, model, cfg)
    put = mc_price(
        state, OptionSpec(strike=100.0, maturity=0.5, payoff=PayoffKind.PUT), scaled_vol, model, cfg
    )
    forward = martingale_check(state, scaled_vol, model, cfg, 0.5)
    assert call.estimate - put.estimate == pytest.approx(forward.estimate - 100.0, abs=1e-9)
    assert abs(forward.estimate - 100.0) < 3 * forward.stderr
    leveraged = martingale_check(MarketState(t=0.0, x=100.0, rho=-0.7), scaled_vol, model, cfg, 1.0)
    assert abs(leveraged.estimate - 100.0) < 3 * leveraged.stderr


def test_expiry_returns_payoff(scaled_vol, model):
    """At T = t the payoff is returned without simulation."""
    result = mc_price(
        MarketState(t=1.0, x=120.0), OptionSpec(strike=100.0, maturity=1.0), scaled_vol, model,
        small_config(),
    )
    assert result.estimate == 20.0
    assert result.stderr == 0.0


@pytest.mark.timeout(300)
def test_seed_determinism(scaled_vol, model, monkeypatch):
    """Identical configurations give identical estimates for any worker count."""
    state = MarketState(t=0.0, x=100.0, rho=-0.5)
    spec = OptionSpec(strike=100.0, maturity=0.25)
    cfg = small_config(n_paths=2000)
    first = mc_price(state, spec, scaled_vol, model, cfg)
    monkeypatch.setenv(ENV_THREADS, "1")
    second = mc_price(state, spec, scaled_vol, model, cfg)
    assert first.estimate == second.estimate
    assert first.stderr == second.stderr
    other = mc_price(state, spec, scaled_vol, model, small_config(n_paths=2000, seed=6))
    assert other.estimate != first.estimate


def test_discretization_warning(scaled_vol, model, caplog):
    """Fewer than 10 steps per eps is allowed with a warning."""
    state = MarketState(t=0.0, x=100.0)
    with caplog.at_level(logging.WARNING, logger="mc_oracle"):
        mc_price(
            state,
            OptionSpec(strike=100.0, maturity=0.1),
            scaled_vol,
            model,
            small_config(n_paths=1000, steps_per_eps=5),
        )
    assert "under-resolve" in caplog.text


def test_ladder_needs_four_rungs(scaled_vol, model):
    """A ladder with fewer than four values cannot be fitted."""
    state = MarketState(t=0.0, x=100.0)
    with pytest.raises(InsufficientDataError):
        convergence_study(
            state, OptionSpec(strike=100.0, maturity=1.0), scaled_vol, model,
            small_config(eps_ladder=[0.1]),
        )


@pytest.mark.timeout(300)
def test_common_random_numbers_reduce_variance(scaled_vol, model):
    """Shared increments across rungs shrink the variance of payoff differences."""
    state = MarketState(t=0.0, x=100.0, rho=-0.5)
    spec = OptionSpec(strike=100.0, maturity=0.25)
    cfg = small_config(n_paths=2000, steps_per_eps=10, eps_ladder=[0.1, 0.05])
    coupled = ladder_difference_variance(state, spec, scaled_vol, model, cfg)
    independent = ladder_difference_variance(state, spec, scaled_vol, model, cfg, coupled=False)
    assert coupled < 0.5 * independent


def test_verdict_pass():
    """A slope above 1 - H with decreasing residuals passes."""
    verdict, _ = convergence_verdict(0.6, [0.4, 0.2, 0.1, 0.05], [0.01] * 4, fit(1.0, 0.8, 1.2))
    assert verdict == Verdict.PASS


def test_verdict_fail():
    """An upper confidence bound below 1 - H fails."""
    verdict, message = convergence_verdict(
        0.6, [0.4, 0.35, 0.3, 0.27], [0.001] * 4, fit(0.2, 0.15, 0.25)
    )
    assert verdict == Verdict.FAIL
    assert "below" in message


def test_verdict_noise_floor():
    """A residual under two standard errors is inconclusive, not failed."""
    verdict, _ = convergence_verdict(0.6, [0.4, 0.2, 0.1, 0.01], [0.01] * 4, fit(1.0, 0.8, 1.2))
    assert verdict == Verdict.INCONCLUSIVE
    assert Verdict.INCONCLUSIVE.value == "inconclusive"


def test_verdict_unresolved_slope():
    """A slope whose interval straddles 1 - H is inconclusive."""
    verdict, _ = convergence_verdict(0.6, [0.4, 0.3, 0.25, 0.2], [0.01] * 4, fit(0.35, 0.2, 0.5))
    assert verdict == Verdict.INCONCLUSIVE
    verdict, _ = convergence_verdict(0.6, [0.4, 0.6, 0.1, 0.05], [0.01] * 4, fit(1.0, 0.8, 1.2))
    assert verdict == Verdict.INCONCLUSIVE


@pytest.mark.timeout(900)
def test_correction_reduces_error(scaled_vol):
    """At eps = 0.05 the corrected price is closer to the oracle than the leading price."""
    model = HurstModel(H=0.6, eps=0.05)
    path = history_path(model, 0.0, seed=3)
    state = MarketState(t=0.0, x=100.0, rho=-0.5, path=path)
    spec = OptionSpec(strike=100.0, maturity=1.0)
    result = mc_price(state, spec, scaled_vol, model, small_config(n_paths=20000, seed=3))
    decomposition = corrected_price(state, spec, scaled_vol, model)
    assert abs(result.estimate - decomposition.total) < abs(result.estimate - decomposition.q0)


@pytest.mark.timeout(1800)
def test_convergence_study_report(scaled_vol, model):
    """The report carries one row per rung, coarsest first, with coupled increments."""
    state = MarketState(t=0.0, x=100.0, rho=-0.5)
    cfg = small_config(n_paths=2000, steps_per_eps=10, eps_ladder=[0.0125, 0.05, 0.1, 0.025])
    report = convergence_study(
        state, OptionSpec(strike=100.0, maturity=0.5), scaled_vol, model, cfg
    )
    assert [row.eps for row in report.rows] == [0.1, 0.05, 0.025, 0.0125]
    assert report.coupled
    assert report.verdict in list(Verdict)
    for row in report.rows:
        assert row.residual == pytest.approx(abs(row.mc_price - row.corrected))
        assert row.resolved == (row.residual >= 2 * row.stderr)
    assert report.to_dict()["verdict"] in ("PASS", "FAIL", "inconclusive")


@pytest.mark.timeout(1800)
def test_moment_study(scaled_vol, model):
    """phi variance and cross-maturity covariance match their limits; E[I^4] follows eps^(4-4H)."""
    cfg = small_config(n_paths=1000, eps_ladder=[0.04, 0.02, 0.01], batch_size=250)
    report = moment_study(scaled_vol, model, 1.0, cfg)
    assert report.eps == 0.01
    assert report.variance_ratio == pytest.approx(1.0, abs=0.25)
    assert report.covariance_ratio == pytest.approx(1.0, abs=0.3)
    assert abs(report.phi_mean) < 3 * report.phi_mean_stderr
    assert report.fourth_moment_bound == pytest.approx(1.6)
    assert report.fourth_moment_fit.slope >= report.fourth_moment_bound - 0.2
