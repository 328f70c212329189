"""
The volatility map sigma = F(Z) with its Gaussian moments and Hermite expansion.

Moments are averages over the stationary law Z ~ N(0, sigma_ou^2), written as
<f> = E[f(sigma_ou X)] with X standard normal. F~(w) = F(sigma_ou w)^2.
"""
import logging
import math
from typing import Dict, Optional, Union

import numpy as np
from scipy import special, stats
from scipy.interpolate import PchipInterpolator

from fracvol.constants import (
    HERMITE_K_MAX,
    HERMITE_NODES,
    MOMENT_TOLERANCE,
    TABLE_MOMENT_TOLERANCE,
)
from fracvol.fou_core import fou_correlation, hurst_constants
from fracvol.helpers.errors import ConfigValidationError, DomainError, QuadratureError
from fracvol.helpers.quadrature import gauss_hermite, gauss_legendre, gaussian_expectation
from fracvol.helpers.stats import SlopeFit
from fracvol.helpers.typing import ArrayLike, RealFunction
from fracvol.models.hurst import HurstModel, check_hurst
from fracvol.models.vol_function import HermiteExpansion, VolKind, VolMoments, VolSpec

LOGGER = logging.getLogger("vol_model")

LOGISTIC_DEFAULTS = {"sigma_lo": 0.05, "sigma_hi": 0.5, "kappa": 1.0}
_VALIDATION_SPAN = 8.0
_COEFFICIENT_FLOOR = 1e-24
_AUTOCOV_NODES = 96


class VolFunction:
    """A volatility function F of the factor value, bound to a Hurst exponent."""

    def __init__(self, spec: VolSpec, H: float) -> None:  # pylint: disable=invalid-name
        """Initialize from a specification; F~ depends on sigma_ou through H."""
        self.spec = spec
        self.H = check_hurst(H)  # pylint: disable=invalid-name
        self.sigma_ou = math.sqrt(hurst_constants(H)[1])
        self._moments: Optional[VolMoments] = None
        self._hermite: Dict[int, HermiteExpansion] = {}
        self._table: Optional[PchipInterpolator] = None
        self._table_deriv = None
        self._degenerate = False
        if self.kind == VolKind.LOGISTIC:
            self._params = {**LOGISTIC_DEFAULTS, **spec.params}
            if not 0 < self._params["sigma_lo"] < self._params["sigma_hi"]:
                raise ConfigValidationError(
                    "vol.params", "logistic needs 0 < sigma_lo < sigma_hi"
                )
            if not self._params["kappa"] > 0:
                raise ConfigValidationError("vol.params.kappa", "must be positive")
        elif self.kind == VolKind.TABLE:
            self._params = dict(spec.params)
            self._setup_table()
        else:
            self._params = dict(spec.params)
        self.validate()

    @classmethod
    def from_dict(cls, value: Dict, H: float) -> "VolFunction":  # pylint: disable=invalid-name
        """Create from a JSON-style {"kind": ..., "params": {...}} mapping."""
        kind = value.get("kind", VolKind.ERF.value)
        if kind == "paper-appendix":
            kind = VolKind.ERF.value
        if kind not in [item.value for item in VolKind]:
            raise ConfigValidationError("vol.kind", f"unknown volatility kind {kind!r}")
        return cls(VolSpec(kind=VolKind(kind), params=dict(value.get("params", {}))), H)

    @classmethod
    def constant(cls, level: float, H: float) -> "VolFunction":  # pylint: disable=invalid-name
        """Create the degenerate constant function F = level (test use)."""
        spec = VolSpec(
            kind=VolKind.TABLE,
            params={"z": [-1.0, 1.0], "sigma": [level, level], "allow_degenerate": True},
        )
        return cls(spec, H)

    @property
    def kind(self) -> VolKind:
        """Return the function family."""
        return self.spec.kind

    @property
    def degenerate(self) -> bool:
        """Return True for a constant table."""
        return self._degenerate

    def _setup_table(self) -> None:
        knots = np.asarray(self._params.get("z", []), dtype=float)
        values = np.asarray(self._params.get("sigma", []), dtype=float)
        if knots.size < 2 or knots.size != values.size:
            raise ConfigValidationError(
                "vol.params", "table needs matching 'z' and 'sigma' lists of length >= 2"
            )
        if np.any(np.diff(knots) <= 0):
            raise ConfigValidationError("vol.params.z", "knots must be strictly increasing")
        steps = np.diff(values)
        self._degenerate = bool(np.all(steps == 0))
        if self._degenerate and not self._params.get("allow_degenerate", False):
            raise ConfigValidationError(
                "vol.params.sigma", "constant table requires allow_degenerate"
            )
        if not self._degenerate and np.any(steps <= 0):
            raise ConfigValidationError(
                "vol.params.sigma", "values must be strictly increasing"
            )
        if np.any(values <= 0):
            raise ConfigValidationError("vol.params.sigma", "values must be positive")
        self._table = PchipInterpolator(knots, values, extrapolate=False)
        self._table_deriv = self._table.derivative()

    @property
    def knots(self) -> Optional[np.ndarray]:
        """Return table knots in factor units, None for closed-form kinds."""
        if self._table is None:
            return None
        return self._table.x

    def __call__(self, z: ArrayLike) -> np.ndarray:
        """Return F(z)."""
        z = np.asarray(z, dtype=float)
        if self.kind == VolKind.LOGISTIC:
            lo, hi = self._params["sigma_lo"], self._params["sigma_hi"]
            return lo + (hi - lo) * special.expit(self._params["kappa"] * z)
        if self.kind == VolKind.TABLE:
            knots = self._table.x
            return self._table(np.clip(z, knots[0], knots[-1]))
        return np.sqrt(self.tilde(z / self.sigma_ou))

    def derivative(self, z: ArrayLike) -> np.ndarray:
        """Return F'(z)."""
        z = np.asarray(z, dtype=float)
        if self.kind == VolKind.LOGISTIC:
            lo, hi = self._params["sigma_lo"], self._params["sigma_hi"]
            kappa = self._params["kappa"]
            logistic = special.expit(kappa * z)
            return (hi - lo) * kappa * logistic * (1.0 - logistic)
        if self.kind == VolKind.TABLE:
            knots = self._table.x
            inside = (z >= knots[0]) & (z <= knots[-1])
            return np.where(inside, self._table_deriv(np.clip(z, knots[0], knots[-1])), 0.0)
        w = z / self.sigma_ou
        if self.kind == VolKind.ERF:
            # scaled complementary error function keeps the far left tail finite
            scaled = np.sqrt(math.sqrt(math.pi) * special.erfcx(-0.5 * w))
            return np.exp(-0.125 * w * w) / (2.0 * scaled * self.sigma_ou)
        return self.tilde_derivative(w) / (2.0 * np.sqrt(self.tilde(w)) * self.sigma_ou)

    def tilde(self, w: ArrayLike) -> np.ndarray:
        """Return F~(w) = F(sigma_ou w)^2."""
        w = np.asarray(w, dtype=float)
        if self.kind == VolKind.ERF:
            return math.sqrt(math.pi) * special.erfc(-0.5 * w)
        if self.kind == VolKind.SINC_SQUARED:
            safe = np.where(w == 0, 1.0, w)
            sine_integral, _ = special.sici(2.0 * w)
            return 0.5 * math.pi + sine_integral - np.where(w == 0, 0.0, np.sin(w) ** 2 / safe)
        return self(self.sigma_ou * w) ** 2

    def tilde_derivative(self, w: ArrayLike) -> np.ndarray:
        """Return dF~/dw."""
        w = np.asarray(w, dtype=float)
        if self.kind == VolKind.ERF:
            return np.exp(-0.25 * w * w)
        if self.kind == VolKind.SINC_SQUARED:
            return np.sinc(w / math.pi) ** 2
        z = self.sigma_ou * w
        return 2.0 * self.sigma_ou * self(z) * self.derivative(z)

    def validate(self) -> None:
        """Check positivity, monotonicity and boundedness on a dense grid."""
        grid = self.sigma_ou * np.linspace(-_VALIDATION_SPAN, _VALIDATION_SPAN, 2001)
        values = self(grid)
        slopes = self.derivative(grid)
        if not np.all(np.isfinite(values)) or not np.all(np.isfinite(slopes)):
            raise DomainError(f"{self.kind.value} volatility is not finite on the grid")
        if np.any(values <= 0):
            raise DomainError(f"{self.kind.value} volatility is not positive")
        if self._degenerate:
            return
        if np.any(slopes < 0):
            raise DomainError(f"{self.kind.value} volatility is not increasing")
        if self.kind != VolKind.TABLE and np.any(np.diff(values) <= 0):
            raise DomainError(f"{self.kind.value} volatility is not strictly increasing")

    def G(self, z: ArrayLike) -> np.ndarray:  # pylint: disable=invalid-name
        """Return G(z) = (F(z)^2 - sigma_bar^2)/2."""
        return 0.5 * (self(z) ** 2 - self.moments.sigma_bar_sq)

    @property
    def moments(self) -> VolMoments:
        """Return the cached Gaussian moments."""
        if self._moments is None:
            self._moments = self._compute_moments()
        return self._moments

    def gaussian_average(self, func: RealFunction) -> float:
        """Return E[func(sigma_ou X)] for X standard normal."""
        return self._average(func)[0]

    def _average(self, func: RealFunction):
        if self.kind == VolKind.TABLE:
            return _piecewise_expectation(
                lambda x: func(self.sigma_ou * x),
                self._table.x / self.sigma_ou,
                TABLE_MOMENT_TOLERANCE,
            )
        return gaussian_expectation(
            lambda x: func(self.sigma_ou * x), MOMENT_TOLERANCE, HERMITE_NODES
        )

    def _compute_moments(self) -> VolMoments:
        integrands = {
            "sigma_bar_sq": lambda z: self(z) ** 2,
            "sigma_tilde": self,
            "ff_prime": lambda z: self(z) * self.derivative(z),
            "f_prime": self.derivative,
            "f_prime_sq": lambda z: self.derivative(z) ** 2,
        }
        values = {}
        nodes = 0
        for name, func in integrands.items():
            values[name], used = self._average(func)
            nodes = max(nodes, used)
        LOGGER.debug("moments of %s volatility converged with %s nodes", self.kind.value, nodes)
        return VolMoments(nodes=nodes, **values)

    def hermite(self, k_max: int = 30) -> HermiteExpansion:
        """Return the cached Hermite expansion of F~ up to k_max."""
        if k_max not in self._hermite:
            if self.kind == VolKind.TABLE:
                self._hermite[k_max] = _table_hermite(self, k_max)
            else:
                self._hermite[k_max] = _hermite_expansion(self.tilde, k_max)
        return self._hermite[k_max]


VolLike = Union[VolFunction, RealFunction]


def _piecewise_expectation(func, knots: np.ndarray, tolerance: float, n_nodes: int = 16):
    """
    Return E[func(X)] for a function that is smooth between knots and constant outside.

    Composite Gauss-Legendre against the normal density on every knot interval,
    exact normal tail masses outside; nodes double until the change is below
    tolerance.
    """

    def estimate(nodes_per_interval):
        total = 0.0
        for lower, upper in zip(knots[:-1], knots[1:]):
            x, w = gauss_legendre(nodes_per_interval, lower, upper)
            total += float(np.dot(w, func(x) * stats.norm.pdf(x)))
        total += float(func(np.array([knots[0]]))[0]) * stats.norm.cdf(knots[0])
        total += float(func(np.array([knots[-1]]))[0]) * stats.norm.sf(knots[-1])
        return total

    previous = estimate(n_nodes)
    while n_nodes < 512:
        n_nodes *= 2
        current = estimate(n_nodes)
        if abs(current - previous) <= tolerance:
            return current, n_nodes
        previous = current
    raise QuadratureError(f"table moment did not converge to {tolerance:.1e}")


def _normalized_hermite(x: np.ndarray, k_max: int) -> np.ndarray:
    """Return he_k(x) = He_k(x)/sqrt(k!) for k = 0..k_max (rows)."""
    values = np.empty((k_max + 1,) + np.shape(x))
    values[0] = 1.0
    if k_max >= 1:
        values[1] = x
    for order in range(1, k_max):
        values[order + 1] = (x * values[order] - math.sqrt(order) * values[order - 1]) / (
            math.sqrt(order + 1)
        )
    return values


def _expansion_from_normalized(normalized: np.ndarray, second_moment: float) -> HermiteExpansion:
    orders = np.arange(normalized.size)
    scale = np.exp(0.5 * special.gammaln(orders + 1.0))
    return HermiteExpansion(
        coefficients=(normalized * scale).tolist(),
        normalized=normalized.tolist(),
        second_moment=float(second_moment),
    )


def _hermite_expansion(tilde: RealFunction, k_max: int) -> HermiteExpansion:
    nodes, weights = gauss_hermite(max(256, 4 * k_max))
    values = tilde(nodes)
    normalized = _normalized_hermite(nodes, k_max) @ (weights * values)
    second_moment = float(np.dot(weights, values * values))
    return _expansion_from_normalized(normalized, second_moment)


def _table_hermite(func: VolFunction, k_max: int) -> HermiteExpansion:
    knots = func.knots / func.sigma_ou
    normalized = np.zeros(k_max + 1)
    second_moment = 0.0
    for lower, upper in zip(knots[:-1], knots[1:]):
        x, w = gauss_legendre(64, lower, upper)
        weighted = w * stats.norm.pdf(x) * func.tilde(x)
        normalized += _normalized_hermite(x, k_max) @ weighted
        second_moment += float(np.dot(weighted, func.tilde(x)))
    # constant tails: int_b^inf he_k p = he_{k-1}(b) p(b) / sqrt(k)
    low_value = float(func.tilde(knots[0]))
    high_value = float(func.tilde(knots[-1]))
    normalized[0] += low_value * stats.norm.cdf(knots[0]) + high_value * stats.norm.sf(knots[-1])
    if k_max >= 1:
        orders = np.arange(1, k_max + 1)
        he_low = _normalized_hermite(np.array(knots[0]), k_max - 1)
        he_high = _normalized_hermite(np.array(knots[-1]), k_max - 1)
        normalized[1:] += (
            high_value * he_high * stats.norm.pdf(knots[-1])
            - low_value * he_low * stats.norm.pdf(knots[0])
        ) / np.sqrt(orders)
    second_moment += low_value ** 2 * stats.norm.cdf(knots[0])
    second_moment += high_value ** 2 * stats.norm.sf(knots[-1])
    return _expansion_from_normalized(normalized, second_moment)


def evaluate(F: VolFunction, z: ArrayLike) -> ArrayLike:  # pylint: disable=invalid-name
    """Return sigma = F(z)."""
    value = F(z)
    return float(value) if np.ndim(value) == 0 else value


def evaluate_deriv(F: VolFunction, z: ArrayLike) -> ArrayLike:  # pylint: disable=invalid-name
    """Return F'(z)."""
    value = F.derivative(z)
    return float(value) if np.ndim(value) == 0 else value


def moments(F: VolFunction, model: HurstModel) -> VolMoments:  # pylint: disable=invalid-name
    """Return the Gaussian moments <F^2>, <F>, <FF'>, <F'>, <F'^2>."""
    if not math.isclose(F.H, model.H):
        raise DomainError(f"volatility function bound to H={F.H}, model has H={model.H}")
    return F.moments


def hermite_coefficients(F: VolLike, k_max: int = 30) -> HermiteExpansion:  # pylint: disable=invalid-name
    """
    Return C_0..C_k_max of F~ in probabilists' Hermite polynomials.

    Accepts a VolFunction or a plain callable taken as F~ itself.
    """
    if not 0 <= k_max <= HERMITE_K_MAX:
        raise DomainError(f"k_max must lie in [0, {HERMITE_K_MAX}], got {k_max}")
    if isinstance(F, VolFunction):
        return F.hermite(k_max)
    return _hermite_expansion(F, k_max)


def erf_hermite_coefficients(k_max: int) -> np.ndarray:
    """Return the closed-form C_k of F~(w) = sqrt(pi)(1 + erf(w/2))."""
    coefficients = np.zeros(k_max + 1)
    coefficients[0] = math.sqrt(math.pi)
    for order in range(1, k_max + 1, 2):
        coefficients[order] = (
            (-1.0) ** ((order - 1) // 2)
            * math.gamma(0.5 * order)
            * (2.0 / 3.0) ** (0.5 * order)
            / math.sqrt(math.pi)
        )
    return coefficients


def geometric_decay_ratio(expansion: HermiteExpansion, k_min: int = 1) -> SlopeFit:
    """
    Fit log(C_k^2/k!) = b + k log(ratio) over coefficients above the noise floor.

    The returned fit reports the slope in log units; exp(slope) is the ratio.
    """
    normalized = np.asarray(expansion.normalized)
    orders = np.arange(normalized.size)
    squares = normalized ** 2
    keep = (orders >= k_min) & (squares > _COEFFICIENT_FLOOR)
    if keep.sum() < 3:
        raise DomainError("not enough non-negligible Hermite coefficients to fit a decay")
    fit = stats.linregress(orders[keep], np.log(squares[keep]))
    quantile = stats.t.ppf(0.975, int(keep.sum()) - 2)
    return SlopeFit(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        stderr=float(fit.stderr),
        ci_low=float(fit.slope - quantile * fit.stderr),
        ci_high=float(fit.slope + quantile * fit.stderr),
        n_points=int(keep.sum()),
    )


def _bivariate_average(F: VolFunction, correlation: float) -> float:  # pylint: disable=invalid-name
    nodes, weights = gauss_hermite(_AUTOCOV_NODES)
    centered = F(F.sigma_ou * nodes) - F.moments.sigma_tilde
    partner = correlation * nodes[:, None] + math.sqrt(1.0 - correlation ** 2) * nodes[None, :]
    inner = (F(F.sigma_ou * partner) - F.moments.sigma_tilde) @ weights
    return float(np.dot(weights, centered * inner))


def psi(F: VolFunction, correlation: float) -> float:  # pylint: disable=invalid-name
    """Return Psi(C) = E[(F(Z) - <F>)(F(Z') - <F>)] for factors with correlation C."""
    if not -1.0 <= correlation <= 1.0:
        raise DomainError(f"correlation must lie in [-1, 1], got {correlation}")
    if correlation == 1.0:
        return F.moments.variance
    return _bivariate_average(F, correlation)


def hermite_autocovariance(F: VolFunction, correlation: float, k_max: int = 40) -> float:  # pylint: disable=invalid-name
    """Return Psi(C) from the Hermite series sum_k C^k a_k^2 of the centered F."""
    nodes, weights = gauss_hermite(max(256, 4 * k_max))
    coefficients = _normalized_hermite(nodes, k_max) @ (weights * F(F.sigma_ou * nodes))
    orders = np.arange(1, k_max + 1)
    return float(np.sum(correlation ** orders * coefficients[1:] ** 2))


def vol_autocovariance(F: VolFunction, model: HurstModel, s: ArrayLike) -> ArrayLike:  # pylint: disable=invalid-name
    """Return Cov(sigma_t, sigma_{t+s}) = Psi(C_Z(s/eps)) for calendar lags s >= 0."""
    lags = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(lags < 0):
        raise DomainError("lag must be non-negative")
    moments(F, model)
    out = np.empty(lags.size)
    for index, lag in enumerate(lags):
        if lag == 0:
            out[index] = F.moments.variance
        else:
            correlation = float(fou_correlation(lag / model.eps, model.H))
            out[index] = psi(F, correlation)
    return float(out[0]) if np.ndim(s) == 0 else out
