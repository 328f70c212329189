"""
Closed-form constants, the moving-average kernel and the fOU correlation.

All dimensionless times are measured in units of the mean-reversion time eps.
With a = H - 1/2 the kernel is

    K(t) = [t^a - int_0^t (t-s)^a e^{-s} ds] / Gamma(a+1)
         = (1/Gamma(a)) int_0^t (t-s)^{a-1} e^{-s} ds,

the second form (integration by parts) being positive term by term.
"""
import logging
import math
from functools import lru_cache
from typing import Tuple

import numpy as np
from numpy.polynomial.chebyshev import Chebyshev
from scipy import integrate, special

from fracvol.constants import (
    KERNEL_ASYMPTOTIC_CUTOFF,
    KERNEL_ASYMPTOTIC_TERMS,
    KERNEL_SERIES_CUTOFF,
    TAIL_SPLIT,
)
from fracvol.helpers.errors import DomainError
from fracvol.helpers.quadrature import panel_legendre
from fracvol.helpers.typing import ArrayLike
from fracvol.models.hurst import check_hurst

LOGGER = logging.getLogger("fou_core")

_QUAD_OPTS = {"epsabs": 1e-14, "epsrel": 1e-12, "limit": 500}
_SERIES_TERMS = 48
_CHEBYSHEV_DEGREE = 64
_UPPER_GAMMA_ASYMPTOTIC = 400.0


def _scalar_or_array(value: np.ndarray, like) -> ArrayLike:
    """Return a float for scalar input, an array otherwise."""
    if np.ndim(like) == 0:
        return float(value)
    return value


def hurst_constants(H: float) -> Tuple[float, float]:  # pylint: disable=invalid-name
    """Return (sigma_H^2, sigma_ou^2) for a Hurst exponent in (1/2, 1)."""
    check_hurst(H)
    gamma_2h = math.gamma(2.0 * H + 1.0)
    sigma_h_sq = 1.0 / (gamma_2h * math.sin(math.pi * H))
    return sigma_h_sq, 0.5 * gamma_2h * sigma_h_sq


def fbm_covariance(t: ArrayLike, s: ArrayLike, H: float) -> ArrayLike:  # pylint: disable=invalid-name
    """Return the fBm covariance (sigma_H^2/2)(|t|^2H + |s|^2H - |t-s|^2H)."""
    sigma_h_sq, _ = hurst_constants(H)
    t_arr = np.abs(np.asarray(t, dtype=float))
    s_arr = np.abs(np.asarray(s, dtype=float))
    lag = np.abs(np.asarray(t, dtype=float) - np.asarray(s, dtype=float))
    two_h = 2.0 * H
    value = 0.5 * sigma_h_sq * (t_arr ** two_h + s_arr ** two_h - lag ** two_h)
    return float(value) if np.ndim(value) == 0 else value


class ExpConvolution:
    """
    Evaluate E_c(x) = (1/Gamma(c)) int_0^x (x-y)^{c-1} e^{-y} dy for fixed c > 0.

    A power series is used on [0, 6], a Chebyshev fit of quadrature values on
    [6, 40] and the large-x series sum_n (1-c)_n x^{c-1-n} / Gamma(c) beyond.
    The primitive satisfies int_0^x E_c = E_{c+1}(x) = x^c/Gamma(c+1) - E_c(x).
    """

    def __init__(self, order: float) -> None:
        """Initialize the evaluator for exponent parameter order > 0."""
        if order <= 0:
            raise DomainError(f"order must be positive, got {order}")
        self.order = float(order)
        terms = np.arange(_SERIES_TERMS)
        self._terms = terms
        self._series = special.rgamma(self.order + 1.0 + terms)
        self._primitive_series = special.rgamma(self.order + 2.0 + terms)
        asym = np.arange(KERNEL_ASYMPTOTIC_TERMS)
        self._asym_terms = asym
        self._asym = special.poch(1.0 - self.order, asym) * special.rgamma(self.order)
        self._chebyshev = Chebyshev.interpolate(
            np.vectorize(self.by_quadrature),
            _CHEBYSHEV_DEGREE,
            domain=[KERNEL_SERIES_CUTOFF, KERNEL_ASYMPTOTIC_CUTOFF],
        )

    def by_quadrature(self, x: float) -> float:
        """Return E_c(x) by algebraic-weight adaptive quadrature."""
        if x <= 0:
            return 0.0
        value, _ = integrate.quad(
            lambda y: math.exp(-y),
            0.0,
            x,
            weight="alg",
            wvar=(0.0, self.order - 1.0),
            epsabs=1e-15,
            epsrel=1e-13,
            limit=200,
        )
        return value / math.gamma(self.order)

    def asymptotic(self, x: np.ndarray) -> np.ndarray:
        """Return the large-x series of E_c."""
        x = np.asarray(x, dtype=float)
        powers = x[..., None] ** (self.order - 1.0 - self._asym_terms)
        return np.sum(powers * self._asym, axis=-1)

    def __call__(self, x: ArrayLike) -> np.ndarray:
        """Return E_c(x) for x >= 0."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        small = (x > 0) & (x <= KERNEL_SERIES_CUTOFF)
        if np.any(small):
            xs = x[small]
            powers = (-xs[:, None]) ** self._terms
            out[small] = xs ** self.order * (powers @ self._series)
        middle = (x > KERNEL_SERIES_CUTOFF) & (x < KERNEL_ASYMPTOTIC_CUTOFF)
        if np.any(middle):
            out[middle] = self._chebyshev(x[middle])
        large = x >= KERNEL_ASYMPTOTIC_CUTOFF
        if np.any(large):
            out[large] = self.asymptotic(x[large])
        return out

    def primitive(self, x: ArrayLike) -> np.ndarray:
        """Return int_0^x E_c(y) dy."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        small = (x > 0) & (x <= KERNEL_SERIES_CUTOFF)
        if np.any(small):
            xs = x[small]
            powers = (-xs[:, None]) ** self._terms
            out[small] = xs ** (self.order + 1.0) * (powers @ self._primitive_series)
        rest = x > KERNEL_SERIES_CUTOFF
        if np.any(rest):
            xr = x[rest]
            out[rest] = xr ** self.order / math.gamma(self.order + 1.0) - self(xr)
        return out


class KernelEvaluator:
    """Vectorized evaluation of the kernel K, its primitive and its L2 masses."""

    _GRADE = np.concatenate(([0.0], np.geomspace(1e-12, 1.0, 48)))

    def __init__(self, H: float) -> None:  # pylint: disable=invalid-name
        """Initialize for a Hurst exponent."""
        self.H = check_hurst(H)  # pylint: disable=invalid-name
        self.a = self.H - 0.5  # pylint: disable=invalid-name
        self._conv = ExpConvolution(self.a)
        coeffs = self._conv._asym  # pylint: disable=protected-access
        self._tail_terms = np.arange(2 * coeffs.size - 1)
        self._tail_coeffs = np.convolve(coeffs, coeffs)
        self._unit_nodes, self._unit_weights = panel_legendre(self._GRADE, 16)
        self._tail_at_cutoff = float(self.analytic_tail(KERNEL_ASYMPTOTIC_CUTOFF))

    def kernel(self, x: ArrayLike) -> np.ndarray:
        """Return K(x)."""
        return self._conv(x)

    def primitive(self, x: ArrayLike) -> np.ndarray:
        """Return int_0^x K(u) du = x^a/Gamma(a+1) - K(x)."""
        return self._conv.primitive(x)

    def cell_average(self, lower: ArrayLike, upper: ArrayLike) -> np.ndarray:
        """Return the average of K over [lower, upper] (elementwise)."""
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        width = upper - lower
        out = np.empty(np.broadcast(lower, upper).shape)
        wide = width > 0
        out[...] = self.kernel(np.broadcast_to(lower, out.shape))
        if np.any(wide):
            lo_b = np.broadcast_to(lower, out.shape)[wide]
            hi_b = np.broadcast_to(upper, out.shape)[wide]
            out[wide] = (self.primitive(hi_b) - self.primitive(lo_b)) / (hi_b - lo_b)
        return out

    def analytic_tail(self, lower: ArrayLike) -> np.ndarray:
        """Return int_lower^inf K^2 from the termwise-integrated large-time series."""
        lower = np.asarray(lower, dtype=float)
        exponents = 2.0 * self.a - 1.0 - self._tail_terms
        return np.sum(
            self._tail_coeffs * lower[..., None] ** exponents / (-exponents), axis=-1
        )

    def _panel_l2(self, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
        """Return int_lower^upper K^2 by graded composite Gauss-Legendre."""
        span = (upper - lower)[:, None]
        nodes = lower[:, None] + span * self._unit_nodes[None, :]
        values = self.kernel(nodes)
        return np.sum(values * values * self._unit_weights[None, :], axis=1) * span[:, 0]

    def l2_tail(self, lower: ArrayLike) -> np.ndarray:
        """Return int_lower^inf K(u)^2 du."""
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        out = self.analytic_tail(np.maximum(lower, KERNEL_ASYMPTOTIC_CUTOFF))
        near = lower < KERNEL_ASYMPTOTIC_CUTOFF
        if np.any(near):
            out[near] += self._panel_l2(
                lower[near], np.full(int(near.sum()), KERNEL_ASYMPTOTIC_CUTOFF)
            )
        return out

    def l2_mass(self, upper: ArrayLike) -> np.ndarray:
        """Return int_0^upper K(u)^2 du."""
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        capped = np.minimum(upper, KERNEL_ASYMPTOTIC_CUTOFF)
        out = self._panel_l2(np.zeros_like(capped), capped)
        far = upper > KERNEL_ASYMPTOTIC_CUTOFF
        if np.any(far):
            out[far] += self._tail_at_cutoff - self.analytic_tail(upper[far])
        return out


@lru_cache(maxsize=16)
def kernel_evaluator(H: float) -> KernelEvaluator:  # pylint: disable=invalid-name
    """Return the cached kernel evaluator for H."""
    LOGGER.debug("building kernel evaluator for H=%s", H)
    return KernelEvaluator(H)


@lru_cache(maxsize=16)
def _correlation_convolution(H: float) -> ExpConvolution:  # pylint: disable=invalid-name
    return ExpConvolution(2.0 * H)


def _kernel_scalar(t: float, H: float) -> float:  # pylint: disable=invalid-name
    if t < 0:
        raise DomainError(f"kernel time must be non-negative, got {t}")
    if t == 0:
        return 0.0
    conv = kernel_evaluator(H)._conv  # pylint: disable=protected-access
    if t >= KERNEL_ASYMPTOTIC_CUTOFF:
        return float(conv.asymptotic(t))
    return conv.by_quadrature(t)


def kernel(t: ArrayLike, H: float) -> ArrayLike:  # pylint: disable=invalid-name
    """
    Return the moving-average kernel K(t) for dimensionless t >= 0.

    Adaptive quadrature with an algebraic endpoint weight below t = 40, the
    large-time series above.
    """
    check_hurst(H)
    value = np.vectorize(_kernel_scalar, otypes=[float])(t, H)
    return _scalar_or_array(value, t)


def kernel_l2_tail(L: ArrayLike, H: float) -> ArrayLike:  # pylint: disable=invalid-name
    """Return int_L^inf K(u)^2 du (equal to 1 at L = 0)."""
    check_hurst(H)
    if np.any(np.asarray(L) < 0):
        raise DomainError("tail lower limit must be non-negative")
    value = kernel_evaluator(H).l2_tail(L)
    return _scalar_or_array(value, L)


def kernel_l2_mass(x: ArrayLike, H: float) -> ArrayLike:  # pylint: disable=invalid-name
    """Return int_0^x K(u)^2 du."""
    check_hurst(H)
    if np.any(np.asarray(x) < 0):
        raise DomainError("upper limit must be non-negative")
    value = kernel_evaluator(H).l2_mass(x)
    return _scalar_or_array(value, x)


def _spectral_correlation(s: float, H: float) -> float:  # pylint: disable=invalid-name
    s = abs(s)
    if s == 0:
        return 1.0
    exponent = 1.0 - 2.0 * H
    split = min(1.0, 1.0 / s)
    near, _ = integrate.quad(
        lambda x: math.cos(s * x) / (1.0 + x * x),
        0.0,
        split,
        weight="alg",
        wvar=(exponent, 0.0),
        **_QUAD_OPTS,
    )
    middle = 0.0
    if split < 1.0:
        middle, _ = integrate.quad(
            lambda x: x ** exponent / (1.0 + x * x),
            split,
            1.0,
            weight="cos",
            wvar=s,
            **_QUAD_OPTS,
        )
    far, _ = integrate.quad(
        lambda x: x ** exponent / (1.0 + x * x),
        1.0,
        np.inf,
        weight="cos",
        wvar=s,
        epsabs=1e-13,
        limlst=200,
        limit=500,
    )
    return 2.0 * math.sin(math.pi * H) / math.pi * (near + middle + far)


def _scaled_upper_gamma(order: float, s: np.ndarray) -> np.ndarray:
    """Return e^s Gamma(order, s) / Gamma(order)."""
    out = np.empty_like(s)
    small = s < _UPPER_GAMMA_ASYMPTOTIC
    out[small] = np.exp(s[small]) * special.gammaincc(order, s[small])
    if np.any(~small):
        large = s[~small]
        terms = np.arange(KERNEL_ASYMPTOTIC_TERMS)
        coeffs = (-1.0) ** terms * special.poch(1.0 - order, terms)
        series = np.sum(coeffs * large[:, None] ** (-terms), axis=1)
        out[~small] = large ** (order - 1.0) * series / math.gamma(order)
    return out


def _time_domain_correlation(s: np.ndarray, H: float) -> np.ndarray:  # pylint: disable=invalid-name
    """
    Evaluate [1/2 int e^{-|v|} |s+v|^2H dv - |s|^2H] / Gamma(2H+1).

    Splitting the integral at v = -s and v = 0 gives
    C(s) = e^{-s}/2 + e^s Q(2H+1, s)/2 - s^2H/(2 Gamma(2H+1)) - E_2H(s)/2.
    """
    s = np.abs(np.atleast_1d(np.asarray(s, dtype=float)))
    order = 2.0 * H + 1.0
    return (
        0.5 * np.exp(-s)
        + 0.5 * _scaled_upper_gamma(order, s)
        - 0.5 * s ** (2.0 * H) / math.gamma(order)
        - 0.5 * _correlation_convolution(H)(s)
    )


def fou_correlation(
    s: ArrayLike, H: float, method: str = "spectral"  # pylint: disable=invalid-name
) -> ArrayLike:
    """
    Return the stationary correlation C_Z(s) of the eps-scaled fOU factor.

    The spectral form (2 sin(pi H)/pi) int_0^inf cos(s x) x^(1-2H)/(1+x^2) dx is
    the default; method "time-domain" evaluates the convolution form with
    special functions and is vectorized.
    """
    check_hurst(H)
    if method == "spectral":
        value = np.vectorize(_spectral_correlation, otypes=[float])(s, H)
    elif method == "time-domain":
        value = _time_domain_correlation(s, H).reshape(np.shape(s))
    else:
        raise DomainError(f"unknown correlation method {method!r}")
    return _scalar_or_array(value, s)


def squared_increment_integral(H: float) -> float:  # pylint: disable=invalid-name
    """Return int_0^inf ((1+u)^a - u^a)^2 du = Gamma(a+1)^2/(Gamma(2H+1) sin pi H) - 1/2H."""
    check_hurst(H)
    return math.gamma(H + 0.5) ** 2 / (
        math.gamma(2.0 * H + 1.0) * math.sin(math.pi * H)
    ) - 1.0 / (2.0 * H)


def difference_tail(r, s, q, H: float, upper) -> np.ndarray:  # pylint: disable=invalid-name
    """
    Return int_upper^inf [(u+r)^a - u^a][(u+s)^a - (u+q)^a] du.

    Both brackets are expanded binomially in powers of 1/u and integrated
    termwise; requires r, s, q well below upper.
    """
    a = H - 0.5
    r, s, q, upper = (np.asarray(v, dtype=float) for v in (r, s, q, upper))
    order = np.arange(1, 25)
    binom = special.binom(a, order)
    left = binom * (r[..., None] / upper[..., None]) ** order
    right = binom * (
        (s[..., None] / upper[..., None]) ** order
        - (q[..., None] / upper[..., None]) ** order
    )
    denominator = order[:, None] + order[None, :] - 2.0 * a - 1.0
    total = np.einsum("...n,...m,nm->...", left, right, 1.0 / denominator)
    return total * upper ** (2.0 * a + 1.0)


def _split_point(r: float, s: float, q: float) -> float:
    return max(TAIL_SPLIT, 10.0 * max(r, s, q))


def kernel_difference_integral(r: float, s: float, q: float, H: float) -> float:  # pylint: disable=invalid-name
    """Return int_0^inf [(u+r)^a - u^a][(u+s)^a - (u+q)^a] du by adaptive quadrature."""
    check_hurst(H)
    if min(r, s, q) < 0:
        raise DomainError("shifts r, s, q must be non-negative")
    a = H - 0.5

    def integrand(u):
        return ((u + r) ** a - u ** a) * ((u + s) ** a - (u + q) ** a)

    upper = _split_point(r, s, q)
    points = sorted({p for p in (r, s, q, 1.0) if 0 < p < upper})
    head, _ = integrate.quad(integrand, 0.0, upper, points=points or None, **_QUAD_OPTS)
    return head + float(difference_tail(r, s, q, H, upper))


_GRID_GRADE = np.concatenate(([0.0], np.geomspace(1e-14, 1.0, 61)))
_GRID_NODES, _GRID_WEIGHTS = panel_legendre(_GRID_GRADE, 16)


def kernel_difference_grid(r, s, q, H: float, chunk: int = 2048) -> np.ndarray:  # pylint: disable=invalid-name
    """Vectorized kernel_difference_integral over arrays of shifts."""
    check_hurst(H)
    a = H - 0.5
    r, s, q = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r, s, q)))
    shape = r.shape
    r, s, q = r.ravel(), s.ravel(), q.ravel()
    upper = np.maximum(TAIL_SPLIT, 10.0 * np.maximum(np.maximum(r, s), q))
    out = np.empty(r.size)
    for start in range(0, r.size, chunk):
        sl = slice(start, start + chunk)
        nodes = upper[sl, None] * _GRID_NODES[None, :]
        base = nodes ** a
        values = ((nodes + r[sl, None]) ** a - base) * (
            (nodes + s[sl, None]) ** a - (nodes + q[sl, None]) ** a
        )
        out[sl] = upper[sl] * (values @ _GRID_WEIGHTS)
    out += difference_tail(r, s, q, H, upper)
    return out.reshape(shape)
