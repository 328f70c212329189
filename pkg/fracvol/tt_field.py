"""
The normalized t-T correction field psi_{t,T}.

psi is the zero-mean unit-variance Gaussian limit of eps^(H-1) phi_{t,T} / (sigma_phi (T-t)^H)
with correlation

    C_phi(t, t'; T, T') = int_0^inf [(u+r)^a - u^a][(u+s)^a - (u+q)^a] du
                          / int_0^inf [(1+u)^a - u^a]^2 du,

a = H - 1/2, q = (t'-t)/sqrt(tau tau'), r = sqrt(tau/tau'), s = (T'-t)/sqrt(tau tau'),
for t <= t'. The transects fixed maturity, fixed time to maturity and fixed current
time reduce C_phi to one-variable correlations.
"""
import logging
import math
import time
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from fracvol.fou_core import (
    difference_tail,
    kernel_difference_grid,
    kernel_difference_integral,
    squared_increment_integral,
)
from fracvol.fou_sampler import cholesky_factor, path_generator
from fracvol.helpers.errors import DomainError
from fracvol.helpers.typing import ArrayLike
from fracvol.models.hurst import HurstModel, check_hurst
from fracvol.models.tt_grid import FieldMode, TTCovarianceGrid

LOGGER = logging.getLogger("tt_field")


def _ordered(t: float, t2: float, T: float, T2: float):  # pylint: disable=invalid-name
    for current, maturity in ((t, T), (t2, T2)):
        if not maturity > current:
            raise DomainError(f"need t < T, got t={current}, T={maturity}")
    if t > t2:
        return t2, t, T2, T
    return t, t2, T, T2


def shift_parameters(
    t: float, t2: float, T: float, T2: float  # pylint: disable=invalid-name
) -> Tuple[float, float, float]:
    """Return (r, s, q) of the pair (t, T), (t', T') after ordering t <= t'."""
    t, t2, T, T2 = _ordered(t, t2, T, T2)  # pylint: disable=invalid-name
    root = math.sqrt((T - t) * (T2 - t2))
    return math.sqrt((T - t) / (T2 - t2)), (T2 - t) / root, (t2 - t) / root


def _correlation(r: float, s: float, q: float, H: float) -> float:  # pylint: disable=invalid-name
    value = kernel_difference_integral(r, s, q, H) / squared_increment_integral(H)
    return min(max(value, -1.0), 1.0)


def cphi(t: float, t2: float, T: float, T2: float, H: float) -> float:  # pylint: disable=invalid-name
    """Return the correlation of psi_{t,T} and psi_{t',T'}."""
    check_hurst(H)
    if (t, T) == (t2, T2):
        _ordered(t, t2, T, T2)
        return 1.0
    return _correlation(*shift_parameters(t, t2, T, T2), H)


def delta_fixed_maturity(t: float, t2: float, T: float) -> float:  # pylint: disable=invalid-name
    """Return (t'-t)/|2T - (t+t')| for two current times before the maturity T."""
    if not (t < T and t2 < T):
        raise DomainError(f"both times must precede the maturity {T}")
    return (t2 - t) / abs(2.0 * T - (t + t2))


def delta_ttm(tau: float, tau2: float) -> float:
    """Return (tau - tau')/(tau + tau') for two times to maturity of one contract."""
    if not (tau > 0 and tau2 > 0):
        raise DomainError("times to maturity must be positive")
    return (tau - tau2) / abs(tau + tau2)


def delta_time(t: float, t2: float, tau: float) -> float:
    """Return (t'-t)/tau at a fixed time to maturity."""
    if not tau > 0:
        raise DomainError("time to maturity must be positive")
    return (t2 - t) / tau


def delta_maturity(tau: float, tau2: float) -> float:
    """Return (tau - tau')/min(tau, tau') at a fixed current time."""
    if not (tau > 0 and tau2 > 0):
        raise DomainError("times to maturity must be positive")
    return (tau - tau2) / min(tau, tau2)


def _vectorized(func, delta: ArrayLike, H: float) -> ArrayLike:  # pylint: disable=invalid-name
    check_hurst(H)
    value = np.vectorize(lambda item: func(float(item), H), otypes=[float])(delta)
    return float(value) if np.ndim(value) == 0 else value


def _fixed_maturity(delta: float, H: float) -> float:  # pylint: disable=invalid-name
    if not abs(delta) < 1.0:
        raise DomainError(f"relative separation must satisfy |delta| < 1, got {delta}")
    if delta == 0.0:
        return 1.0
    scale = math.sqrt(1.0 - delta * delta)
    shift = (abs(delta) + 1.0) / scale
    return _correlation(shift, shift, 2.0 * abs(delta) / scale, H)


def _fixed_ttm(delta: float, H: float) -> float:  # pylint: disable=invalid-name
    if delta == 0.0:
        return 1.0
    return _correlation(1.0, 1.0 + abs(delta), abs(delta), H)


def _fixed_time(delta: float, H: float) -> float:  # pylint: disable=invalid-name
    if delta == 0.0:
        return 1.0
    root = math.sqrt(1.0 + abs(delta))
    return _correlation(1.0 / root, root, 0.0, H)


def corr_fixed_maturity(delta: ArrayLike, H: float) -> ArrayLike:  # pylint: disable=invalid-name
    """Return C(delta) of psi_1(tau; T) = psi_{T-tau,T}, |delta| < 1."""
    return _vectorized(_fixed_maturity, delta, H)


def corr_fixed_ttm(delta: ArrayLike, H: float) -> ArrayLike:  # pylint: disable=invalid-name
    """Return C_2(delta) of psi_2(t; tau) = psi_{t,t+tau}; even in delta."""
    return _vectorized(_fixed_ttm, delta, H)


def corr_fixed_time(delta: ArrayLike, H: float) -> ArrayLike:  # pylint: disable=invalid-name
    """Return C_3(delta) of psi_3(tau; t) = psi_{t,t+tau}; even in delta."""
    return _vectorized(_fixed_time, delta, H)


def fixed_ttm_tail(delta: ArrayLike, H: float) -> ArrayLike:  # pylint: disable=invalid-name
    """
    Return the leading large-separation behaviour of C_2.

    C_2(delta) ~ a^2 B(a, 1-2a) |delta|^(2H-2) / int((1+u)^a - u^a)^2 du; the next
    term, -a/(a+1) |delta|^(H-3/2), decays only a factor |delta|^(1/2-H) faster.
    """
    check_hurst(H)
    a = H - 0.5
    delta = np.abs(np.asarray(delta, dtype=float))
    value = a * a * special.beta(a, 1.0 - 2.0 * a) * delta ** (2.0 * H - 2.0)
    value = value / squared_increment_integral(H)
    return float(value) if np.ndim(value) == 0 else value


def covariance_grid(
    coords: Iterable[Tuple[float, float]],
    H: float,  # pylint: disable=invalid-name
    mode: FieldMode = FieldMode.FREE,
    axis: Sequence[float] = (),
) -> TTCovarianceGrid:
    """Return the correlation matrix of psi over a list of (t, T) points."""
    check_hurst(H)
    coords = tuple((float(t), float(T)) for t, T in coords)  # pylint: disable=invalid-name
    if not coords:
        raise DomainError("covariance grid needs at least one (t, T) point")
    times = np.array([coord[0] for coord in coords])
    maturities = np.array([coord[1] for coord in coords])
    if np.any(maturities <= times):
        raise DomainError("every grid point needs t < T")
    start = time.time()
    size = times.size
    upper_i, upper_j = np.triu_indices(size, k=1)
    swap = times[upper_i] > times[upper_j]
    first = np.where(swap, upper_j, upper_i)
    second = np.where(swap, upper_i, upper_j)
    tau, tau2 = maturities[first] - times[first], maturities[second] - times[second]
    root = np.sqrt(tau * tau2)
    shifts = np.column_stack(
        (np.sqrt(tau / tau2), (maturities[second] - times[first]) / root, (times[second] - times[first]) / root)
    )
    cov = np.eye(size)
    if shifts.size:
        unique, inverse = np.unique(np.round(shifts, 13), axis=0, return_inverse=True)
        values = kernel_difference_grid(unique[:, 0], unique[:, 1], unique[:, 2], H)
        values = np.clip(values / squared_increment_integral(H), -1.0, 1.0)
        cov[upper_i, upper_j] = values[np.ravel(inverse)]
        cov[upper_j, upper_i] = cov[upper_i, upper_j]
        LOGGER.debug(
            "assembled %sx%s field covariance (%s distinct entries) in %.2fs",
            size,
            size,
            unique.shape[0],
            time.time() - start,
        )
    return TTCovarianceGrid(coords=coords, cov=cov, H=H, mode=mode, axis=tuple(axis))


def fixed_maturity_grid(taus: Sequence[float], H: float, maturity: float = 1.0) -> TTCovarianceGrid:  # pylint: disable=invalid-name
    """Return the grid of psi_1(tau; T) over times to maturity 0 < tau <= T."""
    taus = np.asarray(taus, dtype=float)
    if np.any(taus <= 0) or np.any(taus > maturity):
        raise DomainError(f"times to maturity must lie in (0, {maturity}]")
    coords = [(maturity - tau, maturity) for tau in taus]
    return covariance_grid(coords, H, FieldMode.FIXED_MATURITY, taus)


def fixed_ttm_grid(times: Sequence[float], H: float, tau: float = 1.0) -> TTCovarianceGrid:  # pylint: disable=invalid-name
    """Return the grid of psi_2(t; tau) over current times t."""
    coords = [(t, t + tau) for t in times]
    return covariance_grid(coords, H, FieldMode.FIXED_TTM, times)


def fixed_time_grid(taus: Sequence[float], H: float, current: float = 0.0) -> TTCovarianceGrid:  # pylint: disable=invalid-name
    """Return the grid of psi_3(tau; t) over times to maturity tau > 0."""
    coords = [(current, current + tau) for tau in taus]
    return covariance_grid(coords, H, FieldMode.FIXED_TIME, taus)


def free_grid(times: Sequence[float], maturities: Sequence[float], H: float) -> TTCovarianceGrid:  # pylint: disable=invalid-name
    """Return the grid over all lattice pairs (t, T) with t < T."""
    coords = [(t, T) for t in times for T in maturities if T > t]  # pylint: disable=invalid-name
    return covariance_grid(coords, H, FieldMode.FREE)


def sample_field(grid: TTCovarianceGrid, n: int, seed: int) -> np.ndarray:
    """Return n zero-mean Gaussian realizations (rows) with the grid covariance."""
    if n < 1:
        raise DomainError(f"number of realizations must be positive, got {n}")
    factor = cholesky_factor(grid.cov)
    return np.array(
        [factor @ path_generator(seed, index).standard_normal(grid.size) for index in range(n)]
    )


def _sigma_phi_sq_unit(H: float) -> float:  # pylint: disable=invalid-name
    """Return sigma_phi^2 for <FF'> = 1."""
    return (
        HurstModel(H=H, eps=1.0).sigma_ou_sq
        * squared_increment_integral(H)
        / math.gamma(H + 0.5) ** 2
    )


def phi_covariance(
    t: float,
    t2: float,
    T: float,  # pylint: disable=invalid-name
    T2: float,  # pylint: disable=invalid-name
    H: float,  # pylint: disable=invalid-name
    sigma_phi_sq: Optional[float] = None,
) -> float:
    """Return sigma_phi^2 (T-t)^H (T'-t')^H C_phi of the limit phi (default <FF'> = 1)."""
    if sigma_phi_sq is None:
        sigma_phi_sq = _sigma_phi_sq_unit(H)
    return sigma_phi_sq * ((T - t) * (T2 - t2)) ** H * cphi(t, t2, T, T2, H)


def increment_scalings(t: float, T: float, h: float, H: float) -> Dict[str, float]:  # pylint: disable=invalid-name
    """
    Return mean-square increments of the limit phi (<FF'> = 1) in t and in T.

    dt_coeff and dT_coeff are the leading coefficients of E[(phi_{t,T} - phi_{t+h,T})^2] ~ dt_coeff h
    and E[(phi_{t,T+h} - phi_{t,T})^2] ~ dT_coeff h^2; dt_exact and dT_exact are the
    finite-h values.
    """
    check_hurst(H)
    tau = T - t
    if not (t >= 0 and h > 0 and t + h < T):
        raise DomainError(f"need 0 <= t < t + h < T, got t={t}, h={h}, T={T}")
    a = H - 0.5
    sigma_ou_sq = HurstModel(H=H, eps=1.0).sigma_ou_sq
    scale = sigma_ou_sq / math.gamma(H + 0.5) ** 2

    def near(w):
        return ((tau - h + w) ** a - w ** a) ** 2

    head, _ = integrate.quad(near, 0.0, h, epsabs=1e-16, epsrel=1e-12, limit=200)
    dt_exact = scale * (head + h ** (2.0 * H) * squared_increment_integral(H))

    def far(u):
        return ((u + h) ** a - u ** a) ** 2

    split = max(tau, 10.0 * h)
    body = 0.0
    if split > tau:
        body, _ = integrate.quad(far, tau, split, epsabs=1e-18, epsrel=1e-12, limit=200)
    dT_exact = scale * (body + float(difference_tail(h, h, 0.0, H, split)))  # pylint: disable=invalid-name
    return {
        "dt_coeff": scale * tau ** (2.0 * H - 1.0),
        "dT_coeff": sigma_ou_sq * tau ** (2.0 * H - 2.0) / ((2.0 - 2.0 * H) * math.gamma(H - 0.5) ** 2),
        "dt_exact": dt_exact,
        "dT_exact": dT_exact,
    }
