"""
Implied volatility: Black-Scholes inversion and the fractional expansion.

The corrected price translates into the implied volatility I = sigma_bar (1 + dI) with

    dI = (phi/2)(tau/tau_bar)^-1 + a_F [(tau/tau_bar)^(H-1/2) + (tau/tau_bar)^(H-3/2) log(K/x)].
"""
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from fracvol.constants import BISECTION_STEPS, INVERSION_TOLERANCE, IV_VALIDITY_BOUND
from fracvol.helpers.errors import DomainError, NoArbitrageError
from fracvol.helpers.typing import ArrayLike
from fracvol.models.hurst import HurstModel
from fracvol.models.implied import IVPoint
from fracvol.models.option import MarketState, OptionSpec, PayoffKind
from fracvol.pricer import (
    bs_price,
    corrected_price,
    greeks,
    phi_correction,
    sigma_phi_squared,
    skew_constants,
)
from fracvol.vol_model import VolFunction, moments

LOGGER = logging.getLogger("implied_vol")

_MAX_ITERATIONS = 200
_MAX_SIGMA = 1.0e4


def _call_price(price: float, x: float, K: float, payoff: PayoffKind) -> float:  # pylint: disable=invalid-name
    """Return the call price equivalent of a call or put quote."""
    if payoff == PayoffKind.PUT:
        return price + x - K
    if payoff != PayoffKind.CALL:
        raise DomainError(f"implied volatility needs a call or put, got {payoff.value}")
    return price


def invert_bs(
    price: float,
    t: float,
    x: float,
    K: float,  # pylint: disable=invalid-name
    T: float,  # pylint: disable=invalid-name
    payoff: PayoffKind = PayoffKind.CALL,
    tolerance: float = INVERSION_TOLERANCE,
) -> float:
    """
    Return the Black-Scholes volatility reproducing a call (or put) price.

    A bracketing bisection of BISECTION_STEPS steps is followed by a Newton polish
    that falls back to bisection whenever the step leaves the bracket. Converges
    when the price error is below tolerance * x.
    """
    tau = T - t
    if not tau > 0:
        raise DomainError(f"implied volatility needs tau > 0, got {tau}")
    if not x > 0 or not K > 0:
        raise DomainError(f"spot and strike must be positive, got x={x}, K={K}")
    target = _call_price(price, x, K, payoff)
    lower_band = max(x - K, 0.0)
    if not lower_band < target < x:
        raise NoArbitrageError(
            f"price {price} outside the no-arbitrage band ({lower_band}, {x}) for K={K}"
        )
    threshold = tolerance * x
    low, high = 0.0, 1.0
    while bs_price(t, x, K, T, high) < target:
        low, high = high, 2.0 * high
        if high > _MAX_SIGMA:
            raise NoArbitrageError(f"price {price} too close to the upper band {x}")
    sigma = 0.5 * (low + high)
    for _ in range(BISECTION_STEPS):
        sigma = 0.5 * (low + high)
        if bs_price(t, x, K, T, sigma) < target:
            low = sigma
        else:
            high = sigma
    sigma = 0.5 * (low + high)
    for _ in range(_MAX_ITERATIONS):
        diff = bs_price(t, x, K, T, sigma) - target
        if abs(diff) < threshold:
            return sigma
        if diff < 0:
            low = sigma
        else:
            high = sigma
        if high - low <= 4.0 * np.finfo(float).eps * high:
            # bracket collapsed, the price map cannot resolve further
            return sigma
        vega = greeks(t, x, K, T, sigma)["vega"]
        step = sigma - diff / vega if vega > 0 else -1.0
        sigma = step if low < step < high else 0.5 * (low + high)
    LOGGER.warning(
        "inversion stopped after %s iterations (price %s, K=%s, tau=%s)",
        _MAX_ITERATIONS,
        price,
        K,
        tau,
    )
    return sigma


def relative_iv_correction(
    tau_rel: ArrayLike, log_moneyness: ArrayLike, phi: ArrayLike, a_F: float, H: float  # pylint: disable=invalid-name
) -> ArrayLike:
    """Return dI at relative maturity tau/tau_bar and log-moneyness log(K/x)."""
    tau_rel = np.asarray(tau_rel, dtype=float)
    if np.any(tau_rel <= 0):
        raise DomainError("relative maturity must be positive")
    value = 0.5 * np.asarray(phi) / tau_rel + a_F * (
        tau_rel ** (H - 0.5) + tau_rel ** (H - 1.5) * np.asarray(log_moneyness)
    )
    return float(value) if np.ndim(value) == 0 else value


def iv_correction_band(
    tau_rel: ArrayLike, log_moneyness: ArrayLike, a_F: float, amplitude: float, H: float  # pylint: disable=invalid-name
):
    """Return the mean and standard deviation of dI when phi has sd amplitude (tau/tau_bar)^H."""
    mean = relative_iv_correction(tau_rel, log_moneyness, 0.0, a_F, H)
    tau_rel = np.asarray(tau_rel, dtype=float)
    spread = 0.5 * amplitude * tau_rel ** (H - 1.0) * np.ones_like(np.asarray(log_moneyness, dtype=float))
    return mean, (float(spread) if np.ndim(spread) == 0 else spread)


def iv_expansion(
    state: MarketState,
    spec: OptionSpec,
    F: VolFunction,  # pylint: disable=invalid-name
    model: HurstModel,
    phi: Optional[float] = None,
) -> IVPoint:
    """Return the implied volatility predicted by the first-order expansion."""
    tau = spec.maturity - state.t
    if not tau > 0:
        raise DomainError(f"the implied volatility expansion is singular at tau={tau}")
    if spec.payoff == PayoffKind.TABLE:
        raise DomainError("the implied volatility expansion needs a call or put")
    result = moments(F, model)
    constants = skew_constants(F, model, state.rho, result.sigma_bar)
    if phi is None:
        phi = phi_correction(state, spec, F, model)
    tau_rel = tau / constants.tau_bar
    log_moneyness = math.log(spec.strike / state.x)
    random_part = 0.5 * phi / tau_rel
    skew_part = relative_iv_correction(tau_rel, log_moneyness, 0.0, constants.a_F, model.H)
    total = random_part + skew_part
    forward_sq = result.sigma_bar_sq + 2.0 * phi / tau
    valid = abs(total) <= IV_VALIDITY_BOUND
    if not valid:
        LOGGER.debug(
            "expansion out of regime at tau/tau_bar=%.4g log(K/x)=%.4g (dI=%.4g)",
            tau_rel,
            log_moneyness,
            total,
        )
    return IVPoint(
        tau_rel=tau_rel,
        log_moneyness=log_moneyness,
        iv_total=result.sigma_bar * (1.0 + total),
        delta_iv_random=random_part,
        delta_iv_skew=skew_part,
        sigma_bar=result.sigma_bar,
        phi=phi,
        rms_forward_vol=math.sqrt(forward_sq) if forward_sq > 0 else math.nan,
        first_order_forward_vol=result.sigma_bar + phi / (result.sigma_bar * tau),
        valid=valid,
    )


def expansion_residual(
    state: MarketState,
    spec: OptionSpec,
    F: VolFunction,  # pylint: disable=invalid-name
    model: HurstModel,
    phi: Optional[float] = None,
) -> float:
    """Return invert_bs(corrected price) - sigma_bar (1 + dI) for one contract."""
    if phi is None:
        phi = phi_correction(state, spec, F, model)
    price = corrected_price(state, spec, F, model, phi=phi).total
    implied = invert_bs(price, state.t, state.x, spec.strike, spec.maturity, spec.payoff)
    return implied - iv_expansion(state, spec, F, model, phi=phi).iv_total


def iv_asymptotes(
    model: HurstModel, a_F: float, tau_rel: ArrayLike, log_moneyness: ArrayLike  # pylint: disable=invalid-name
) -> Dict[str, ArrayLike]:
    """Return the short-maturity (log-moneyness) and long-maturity branches of the skew term."""
    tau_rel = np.asarray(tau_rel, dtype=float)
    if np.any(tau_rel <= 0):
        raise DomainError("relative maturity must be positive")
    short = a_F * tau_rel ** (model.H - 1.5) * np.asarray(log_moneyness, dtype=float)
    long = a_F * tau_rel ** (model.H - 0.5)
    return {
        "short": float(short) if np.ndim(short) == 0 else short,
        "long": float(long) if np.ndim(long) == 0 else long,
    }


def iv_mixing_limit(
    V3: float, sigma_bar: float, tau: ArrayLike, log_moneyness: ArrayLike  # pylint: disable=invalid-name
) -> ArrayLike:
    """Return I = sigma_bar - V3 [1/(2 sigma_bar) + log(K/x)/(sigma_bar^3 tau)] of a mixing factor."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0):
        raise DomainError("time to maturity must be positive")
    value = sigma_bar - V3 * (
        0.5 / sigma_bar + np.asarray(log_moneyness, dtype=float) / (sigma_bar ** 3 * tau)
    )
    return float(value) if np.ndim(value) == 0 else value


def mixing_equivalent_v3(a_F: float, sigma_bar: float) -> float:  # pylint: disable=invalid-name
    """Return the V3 that matches the fractional skew term as H decreases to 1/2."""
    return -2.0 * sigma_bar ** 2 * a_F


def mean_iv_surface(
    F: VolFunction,  # pylint: disable=invalid-name
    model: HurstModel,
    rho: float,
    tau_rel: Sequence[float],
    moneyness: Sequence[float],
) -> Dict[str, np.ndarray]:
    """
    Return mean implied volatility and one-sd band over a (tau/tau_bar, K/x) lattice.

    The band uses the stationary spread of phi, eps^(1-H) sigma_phi tau^H.
    """
    result = moments(F, model)
    constants = skew_constants(F, model, rho, result.sigma_bar)
    grid_tau, grid_m = np.meshgrid(
        np.asarray(tau_rel, dtype=float), np.asarray(moneyness, dtype=float), indexing="ij"
    )
    grid_tau, grid_m = grid_tau.ravel(), grid_m.ravel()
    if np.any(grid_m <= 0):
        raise DomainError("moneyness must be positive")
    mean = result.sigma_bar * (
        1.0 + relative_iv_correction(grid_tau, np.log(grid_m), 0.0, constants.a_F, model.H)
    )
    tau = grid_tau * constants.tau_bar
    phi_sd = (
        model.eps ** (1.0 - model.H) * math.sqrt(sigma_phi_squared(F, model)) * tau ** model.H
    )
    spread = phi_sd / (result.sigma_bar * tau)
    return {
        "tau_rel": grid_tau,
        "moneyness": grid_m,
        "mean_iv": mean,
        "iv_plus_sd": mean + spread,
        "iv_minus_sd": mean - spread,
    }


def iv_lattice(
    state: MarketState,
    F: VolFunction,  # pylint: disable=invalid-name
    model: HurstModel,
    strikes: Sequence[float],
    maturities: Sequence[float],
    phi: Optional[float] = None,
) -> List[IVPoint]:
    """
    Return expansion points for every (maturity, strike) pair, maturity-major.

    Without a factor history and without phi the lattice is the mean one (phi = 0).
    """
    points = []
    for maturity in maturities:
        spec_phi = phi
        if spec_phi is None and state.path is not None:
            spec_phi = phi_correction(state, OptionSpec(strike=state.x, maturity=maturity), F, model)
        if spec_phi is None:
            spec_phi = 0.0
        for strike in strikes:
            spec = OptionSpec(strike=strike, maturity=maturity)
            points.append(iv_expansion(state, spec, F, model, phi=spec_phi))
    return points
