"""
First-order corrected European prices under the fractional volatility model.

With tau = T - t and Q0 the Black-Scholes price at the effective volatility
sigma_bar, the corrected price is

    Q = Q0 + phi * x^2 d_xx Q0 + eps^(1-H) sigma_tilde rho D_t * x d_x (x^2 d_xx Q0),

where phi = int_t^T E[G(Z_s) | F_t] ds is the random correction and
D_t = d_bar tau^(H+1/2) the deterministic skew coefficient. Rates are zero.
"""
import logging
import math
from typing import Dict, Optional

import numpy as np
from scipy import special, stats

from fracvol.constants import PHI_HERMITE_NODES, PHI_TIME_NODES
from fracvol.fou_core import kernel_difference_integral, squared_increment_integral
from fracvol.fou_sampler import conditional_means, conditional_std
from fracvol.helpers.errors import ConsistencyError, DomainError
from fracvol.helpers.quadrature import gauss_hermite, graded_legendre
from fracvol.helpers.typing import ArrayLike
from fracvol.models.hurst import HurstModel
from fracvol.models.option import (
    MarketState,
    OptionSpec,
    PayoffKind,
    PriceDecomposition,
    SkewConstants,
)
from fracvol.vol_model import VolFunction, moments

LOGGER = logging.getLogger("pricer")

DUAL_FORM_RTOL = 1e-10
_SIGMA_PHI_RTOL = 1e-8


def _check_inputs(x: float, strike: float, tau: float, sigma: float) -> None:
    if not x > 0 or not strike > 0:
        raise DomainError(f"spot and strike must be positive, got x={x}, K={strike}")
    if tau < 0:
        raise DomainError(f"maturity precedes current time (tau={tau})")
    if not sigma > 0:
        raise DomainError(f"volatility must be positive, got {sigma}")


def d1_value(x: float, strike: float, tau: float, sigma: float) -> float:
    """Return d1 = (log(x/K) + sigma^2 tau/2) / (sigma sqrt(tau))."""
    root = sigma * math.sqrt(tau)
    return (math.log(x / strike) + 0.5 * root * root) / root


def bs_price(t: float, x: float, K: float, T: float, sigma: float) -> float:  # pylint: disable=invalid-name
    """Return the zero-rate Black-Scholes call price; intrinsic value at T = t."""
    tau = T - t
    _check_inputs(x, K, tau, sigma)
    if tau == 0:
        return max(x - K, 0.0)
    d1 = d1_value(x, K, tau, sigma)
    d2 = d1 - sigma * math.sqrt(tau)
    return float(x * special.ndtr(d1) - K * special.ndtr(d2))


def bs_put(t: float, x: float, K: float, T: float, sigma: float) -> float:  # pylint: disable=invalid-name
    """Return the zero-rate Black-Scholes put price from parity."""
    return bs_price(t, x, K, T, sigma) - x + K


def greeks(t: float, x: float, K: float, T: float, sigma: float) -> Dict[str, float]:  # pylint: disable=invalid-name
    """
    Return delta, x^2 d_xx C (gamma_x2), vega and x d_x(x^2 d_xx C) (skew_greek) of a call.

    At T = t the analytic limit is a unit step delta (1/2 at the money) and zero
    second-order Greeks.
    """
    tau = T - t
    _check_inputs(x, K, tau, sigma)
    if tau == 0:
        delta = 1.0 if x > K else (0.5 if x == K else 0.0)
        return {"delta": delta, "gamma_x2": 0.0, "vega": 0.0, "skew_greek": 0.0}
    root = sigma * math.sqrt(tau)
    d1 = d1_value(x, K, tau, sigma)
    density = stats.norm.pdf(d1)
    gamma_x2 = x * density / root
    return {
        "delta": float(special.ndtr(d1)),
        "gamma_x2": float(gamma_x2),
        "vega": float(x * density * math.sqrt(tau)),
        "skew_greek": float(gamma_x2 * (1.0 - d1 / root)),
    }


def _replicated(spec: OptionSpec, t: float, x: float, sigma: float) -> Dict[str, float]:
    """Return price and Greeks of any payoff as bond + underlying + calls."""
    bond, underlying, calls = spec.replication()
    out = {"price": bond + underlying * x, "delta": underlying, "gamma_x2": 0.0, "skew_greek": 0.0}
    for strike, weight in calls:
        call = greeks(t, x, strike, spec.maturity, sigma)
        out["price"] += weight * bs_price(t, x, strike, spec.maturity, sigma)
        for name in ("delta", "gamma_x2", "skew_greek"):
            out[name] += weight * call[name]
    return out


def phi_correction(
    state: MarketState,
    spec: OptionSpec,
    F: VolFunction,  # pylint: disable=invalid-name
    model: HurstModel,
    method: str = "quadrature",
    n_time: int = PHI_TIME_NODES,
    n_hermite: int = PHI_HERMITE_NODES,
) -> float:
    """
    Return phi = int_t^T E[G(Z_s) | F_t] ds.

    The s-integral uses Gauss-Legendre nodes clustered toward s = t, the Gaussian
    conditional expectation uses Gauss-Hermite nodes. Method "linear" returns the
    Gaussian-limit proxy <G'> int_t^T E[Z_s | F_t] ds.
    """
    moments(F, model)
    tau = spec.maturity - state.t
    if tau < 0:
        raise DomainError(f"maturity precedes current time (tau={tau})")
    if tau == 0:
        return 0.0
    if state.path is None:
        raise DomainError("phi needs a factor history (state.path)")
    if not math.isclose(state.path.model.eps, model.eps) or not math.isclose(
        state.path.model.H, model.H
    ):
        raise DomainError("factor history was sampled under a different model")
    times, weights = graded_legendre(n_time, state.t, spec.maturity)
    means = conditional_means(state.path, state.t, times)
    if method == "linear":
        return float(F.moments.ff_prime * np.dot(weights, means))
    if method != "quadrature":
        raise DomainError(f"unknown phi method {method!r}")
    spreads = conditional_std(model, times - state.t)
    nodes, gh_weights = gauss_hermite(n_hermite)
    values = F.G(means[:, None] + np.asarray(spreads)[:, None] * nodes[None, :]) @ gh_weights
    return float(np.dot(weights, values))


def sigma_phi_squared(F: VolFunction, model: HurstModel) -> float:  # pylint: disable=invalid-name
    """Return sigma_phi^2 = sigma_ou^2 <FF'>^2 int((1+u)^a - u^a)^2 du / Gamma(H+1/2)^2."""
    ff_prime = moments(F, model).ff_prime
    return (
        model.sigma_ou_sq
        * ff_prime ** 2
        * squared_increment_integral(model.H)
        / math.gamma(model.H + 0.5) ** 2
    )


def skew_constants(
    F: VolFunction,  # pylint: disable=invalid-name
    model: HurstModel,
    rho: float,
    sigma_bar: Optional[float] = None,
) -> SkewConstants:
    """Return a_F, d_bar, theta_bar and sigma_phi; sigma_phi is cross-checked by quadrature."""
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [-1, 1], got {rho}")
    result = moments(F, model)
    sigma_bar = result.sigma_bar if sigma_bar is None else sigma_bar
    tau_bar = 2.0 / sigma_bar ** 2
    H = model.H  # pylint: disable=invalid-name
    gamma_three_halves = math.gamma(H + 1.5)
    a_f = (
        model.eps ** (1.0 - H)
        * result.sigma_tilde
        * model.sigma_ou
        * rho
        * result.ff_prime
        * tau_bar ** H
        / (2.0 ** 1.5 * sigma_bar * gamma_three_halves)
    )
    sigma_phi_sq = sigma_phi_squared(F, model)
    by_quadrature = (
        model.sigma_ou_sq
        * result.ff_prime ** 2
        * kernel_difference_integral(1.0, 1.0, 0.0, H)
        / math.gamma(H + 0.5) ** 2
    )
    if not math.isclose(sigma_phi_sq, by_quadrature, rel_tol=_SIGMA_PHI_RTOL, abs_tol=1e-300):
        raise ConsistencyError(
            f"sigma_phi^2 closed form {sigma_phi_sq:.12e} != quadrature {by_quadrature:.12e}"
        )
    return SkewConstants(
        a_F=a_f,
        d_bar=model.sigma_ou * result.ff_prime / gamma_three_halves,
        theta_bar=model.sigma_ou * result.ff_prime / math.gamma(H + 0.5),
        sigma_phi=math.sqrt(sigma_phi_sq),
        tau_bar=tau_bar,
        H=H,
    )


def normalized_correction(
    tau_rel: ArrayLike, moneyness: ArrayLike, phi: ArrayLike, a_F: float, H: float  # pylint: disable=invalid-name
) -> ArrayLike:
    """
    Return (Q - Q0)/K in relative maturity tau/tau_bar and moneyness K/x.

    e^{-d1^2/2} (x/K)/sqrt(pi) {(phi/2)(tau/tau_bar)^(-1/2)
    + a_F [(tau/tau_bar)^H + (tau/tau_bar)^(H-1) log(K/x)]},
    with d1 = (tau/tau_bar - log(K/x)) / sqrt(2 tau/tau_bar).
    """
    tau_rel = np.asarray(tau_rel, dtype=float)
    moneyness = np.asarray(moneyness, dtype=float)
    if np.any(tau_rel <= 0) or np.any(moneyness <= 0):
        raise DomainError("relative maturity and moneyness must be positive")
    log_m = np.log(moneyness)
    d1 = (tau_rel - log_m) / np.sqrt(2.0 * tau_rel)
    prefactor = np.exp(-0.5 * d1 * d1) / (moneyness * math.sqrt(math.pi))
    value = prefactor * (
        0.5 * np.asarray(phi) * tau_rel ** -0.5
        + a_F * (tau_rel ** H + tau_rel ** (H - 1.0) * log_m)
    )
    return float(value) if np.ndim(value) == 0 else value


def correction_band(
    tau_rel: ArrayLike, moneyness: ArrayLike, a_F: float, amplitude: float, H: float  # pylint: disable=invalid-name
):
    """Return the mean and standard deviation of (Q - Q0)/K when phi has sd amplitude (tau/tau_bar)^H."""
    mean = normalized_correction(tau_rel, moneyness, 0.0, a_F, H)
    unit = np.asarray(normalized_correction(tau_rel, moneyness, 1.0, 0.0, H))
    spread = unit * amplitude * np.asarray(tau_rel, dtype=float) ** H
    return mean, (float(spread) if np.ndim(spread) == 0 else spread)


def corrected_price(
    state: MarketState,
    spec: OptionSpec,
    F: VolFunction,  # pylint: disable=invalid-name
    model: HurstModel,
    phi: Optional[float] = None,
    check: bool = True,
) -> PriceDecomposition:
    """
    Return the corrected price and its components.

    phi is computed from the state's factor history unless given. For single-strike
    payoffs the normalized form is evaluated alongside and must agree with the
    Greek form; a mismatch raises ConsistencyError.
    """
    result = moments(F, model)
    sigma_bar = result.sigma_bar
    constants = skew_constants(F, model, state.rho, sigma_bar)
    tau = spec.maturity - state.t
    if tau < 0:
        raise DomainError(f"maturity precedes current time (tau={tau})")
    if tau == 0:
        value = spec.payoff_value(state.x)
        return PriceDecomposition(
            q0=value,
            phi=0.0,
            random_term=0.0,
            skew_term=0.0,
            total=value,
            tau_bar=constants.tau_bar,
            a_F=constants.a_F,
        )
    if phi is None:
        phi = phi_correction(state, spec, F, model)
    leading = _replicated(spec, state.t, state.x, sigma_bar)
    random_term = phi * leading["gamma_x2"]
    skew_term = (
        model.eps ** (1.0 - model.H)
        * result.sigma_tilde
        * state.rho
        * constants.d_of_tau(tau)
        * leading["skew_greek"]
    )
    decomposition = PriceDecomposition(
        q0=leading["price"],
        phi=phi,
        random_term=random_term,
        skew_term=skew_term,
        total=leading["price"] + random_term + skew_term,
        tau_bar=constants.tau_bar,
        a_F=constants.a_F,
    )
    if spec.payoff != PayoffKind.TABLE:
        decomposition.d1 = d1_value(state.x, spec.strike, tau, sigma_bar)
        decomposition.normalized = normalized_correction(
            tau / constants.tau_bar, spec.strike / state.x, phi, constants.a_F, model.H
        )
        if check:
            check_dual_forms(decomposition, spec.strike)
    return decomposition


def check_dual_forms(decomposition: PriceDecomposition, strike: float) -> None:
    """Raise ConsistencyError when the Greek and normalized forms disagree."""
    greek_form = (decomposition.random_term + decomposition.skew_term) / strike
    scale = max(abs(greek_form), abs(decomposition.normalized), 1e-300)
    if abs(greek_form - decomposition.normalized) > DUAL_FORM_RTOL * scale + 1e-15:
        raise ConsistencyError(
            f"correction forms disagree: greeks {greek_form:.15e}, "
            f"normalized {decomposition.normalized:.15e}"
        )
