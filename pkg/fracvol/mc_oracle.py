"""
Monte Carlo prices under the full fractional volatility model.

Given the stored history up to t, the factor is simulated forward on a fine
grid from its exact Gaussian law: the conditional mean, a moving average of
fresh cell increments dW and the within-cell remainder drawn from its exact
covariance. The log price takes log-Euler steps with the volatility frozen at
the left end of each step and the noise rho dW + sqrt(1 - rho^2) dB, where dW
are the same cell increments that drive the factor.
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, linalg

from fracvol.constants import STEPS_PER_EPS
from fracvol.fou_core import kernel_evaluator
from fracvol.fou_sampler import FouSampler, conditional_means, sample_paths
from fracvol.helpers.errors import DomainError, InsufficientDataError
from fracvol.helpers.quadrature import gauss_legendre
from fracvol.helpers.stats import SlopeFit, loglog_slope, mean_and_stderr
from fracvol.helpers.util import worker_count
from fracvol.models.fou_path import FouPath, SamplerMethod
from fracvol.models.hurst import HurstModel
from fracvol.models.monte_carlo import (
    ConvergenceReport,
    LadderRow,
    MCConfig,
    MCEstimate,
    MomentReport,
    Verdict,
)
from fracvol.models.option import MarketState, OptionSpec, PayoffKind
from fracvol.pricer import corrected_price, phi_correction, sigma_phi_squared
from fracvol.tt_field import phi_covariance
from fracvol.vol_model import VolFunction, moments

LOGGER = logging.getLogger("mc_oracle")

MIN_LADDER = 4
NOISE_FLOOR_SE = 2.0
SECOND_MATURITY_FACTOR = 1.5
_MC_STREAM = 1
_PANEL_NODES = 8
_GRADED_NODES = 16
_EIGEN_TOL = 1e-6
_RATIO_TOL = 1e-9


def batch_generator(seed: int, batch: int, stream: int = 0) -> np.random.Generator:
    """Return the counter-based generator of a Monte Carlo batch."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence([seed, _MC_STREAM, stream, batch]))
    )


def payoff_values(spec: OptionSpec, x: np.ndarray) -> np.ndarray:
    """Return h(x) elementwise through the static replication of the payoff."""
    bond, underlying, calls = spec.replication()
    value = bond + underlying * x
    for strike, weight in calls:
        value = value + weight * np.maximum(x - strike, 0.0)
    return value


def forward_covariance(model: HurstModel, step: float, n_points: int) -> np.ndarray:
    """
    Return Cov(Y_k, Y_l) of the innovations Y_k = Z_{t+kh} - E[Z_{t+kh} | F_t], k = 1..n.

    Cov = sigma_ou^2 int_0^{kh/eps} K(w) K(w + (l-k)h/eps) dw, accumulated panel by
    panel; the first panel uses nodes graded to the w^(H-1/2) onset of K and the
    diagonal uses the exact L2 mass.
    """
    cov = np.zeros((n_points, n_points))
    if n_points == 0:
        return cov
    evaluator = kernel_evaluator(model.H)
    width = step / model.eps
    beta = 1.0 / (model.H + 0.5)
    nodes, weights = gauss_legendre(_PANEL_NODES, 0.0, 1.0)
    unit, unit_weights = gauss_legendre(_GRADED_NODES, 0.0, 1.0)
    graded = unit ** beta
    graded_weights = beta * unit ** (beta - 1.0) * unit_weights
    panels = np.arange(n_points)[:, None]
    values = evaluator.kernel((panels + nodes[None, :]) * width)
    shifted = evaluator.kernel((panels + graded[None, :]) * width)
    first = shifted[0]
    diagonal = evaluator.l2_mass(width * np.arange(1, n_points + 1))
    cov[np.diag_indices(n_points)] = model.sigma_ou_sq * diagonal
    for lag in range(1, n_points):
        panel = width * (values[: n_points - lag] * values[lag:]) @ weights
        panel[0] = width * np.dot(graded_weights, first * shifted[lag])
        column = model.sigma_ou_sq * np.cumsum(panel)
        rows = np.arange(n_points - lag)
        cov[rows, rows + lag] = column
        cov[rows + lag, rows] = column
    return cov


def covariance_root(matrix: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Return B with B B^T = matrix, clipping eigenvalues lost to quadrature noise."""
    if matrix.size == 0:
        return matrix.copy()
    eigenvalues, vectors = linalg.eigh(matrix)
    if eigenvalues[0] < -_EIGEN_TOL * scale:
        LOGGER.warning("remainder covariance eigenvalue %.2e clipped to zero", eigenvalues[0])
    return vectors * np.sqrt(np.clip(eigenvalues, 0.0, None))[None, :]


class ForwardFactor:
    """Exact conditional simulation of Z at t + k h, k = 0..n_steps-1, given F_t."""

    def __init__(self, path: FouPath, t: float, n_steps: int, step: float) -> None:
        """Precompute the conditional means, cell weights and remainder factor."""
        self.model = path.model
        self.step = step
        self.n_steps = n_steps
        self.times = t + step * np.arange(n_steps)
        self.means = conditional_means(path, t, self.times)
        n_inner = n_steps - 1
        evaluator = kernel_evaluator(self.model.H)
        primitive = evaluator.primitive(np.arange(n_steps) * step / self.model.eps)
        scale = self.model.sigma_ou * math.sqrt(self.model.eps) / step
        if n_inner:
            self._weights = linalg.toeplitz(scale * np.diff(primitive), np.zeros(n_inner))
        else:
            self._weights = np.zeros((0, 0))
        remainder = forward_covariance(self.model, step, n_inner) - step * (
            self._weights @ self._weights.T
        )
        self._remainder = covariance_root(remainder, self.model.sigma_ou_sq)

    def sample(self, shocks: np.ndarray, remainder_shocks: np.ndarray) -> np.ndarray:
        """
        Return Z at the step starts, one row per draw.

        shocks are the standard normal cell increments (n x n_steps), cell k covering
        [t + k h, t + (k+1) h]; remainder_shocks are n x (n_steps - 1).
        """
        out = np.zeros_like(shocks)
        if self.n_steps > 1:
            out[:, 1:] = (
                math.sqrt(self.step) * shocks[:, :-1] @ self._weights.T
                + remainder_shocks @ self._remainder.T
            )
        return out + self.means[None, :]


@dataclass
class _Rung:
    model: HurstModel
    state: MarketState
    factor: ForwardFactor
    block: int = 1


@dataclass
class _Accumulator:
    count: int = 0
    total: float = 0.0
    total_sq: float = 0.0

    def add(self, samples: np.ndarray) -> None:
        self.count += samples.size
        self.total += float(np.sum(samples))
        self.total_sq += float(np.sum(samples * samples))

    def merge(self, other: "_Accumulator") -> None:
        self.count += other.count
        self.total += other.total
        self.total_sq += other.total_sq

    @property
    def mean(self) -> float:
        return self.total / self.count

    @property
    def variance(self) -> float:
        if self.count < 2:
            return 0.0
        return max(self.total_sq - self.total * self.total / self.count, 0.0) / (self.count - 1)


def history_path(model: HurstModel, t: float, seed: int) -> FouPath:
    """Draw a conditionable factor history ending at t from stream (seed, 0)."""
    step = model.eps / STEPS_PER_EPS
    return sample_paths(model, [t - step, t], 1, seed)[0]


def _check_discretization(cfg: MCConfig) -> None:
    cfg.validate()
    if cfg.coarse_steps:
        LOGGER.warning(
            "%s steps per eps under-resolve the volatility path, use at least 10",
            cfg.steps_per_eps,
        )


def _log_euler(
    rung: _Rung,
    F: VolFunction,  # pylint: disable=invalid-name
    shocks: np.ndarray,
    price_shocks: np.ndarray,
    remainder: np.ndarray,
) -> np.ndarray:
    """Return X_T for each row of shocks."""
    z = rung.factor.sample(shocks, remainder)
    sigma = F(z)
    rho = rung.state.rho
    step = rung.factor.step
    noise = rho * shocks + math.sqrt(max(1.0 - rho * rho, 0.0)) * price_shocks
    log_x = math.log(rung.state.x) + np.sum(
        sigma * math.sqrt(step) * noise - 0.5 * sigma * sigma * step, axis=1
    )
    return np.exp(log_x)


def _aggregate(shocks: np.ndarray, block: int) -> np.ndarray:
    if block == 1:
        return shocks
    rows, cols = shocks.shape
    return shocks.reshape(rows, cols // block, block).sum(axis=2) / math.sqrt(block)


def _batch(
    rungs: Sequence[_Rung],
    spec: OptionSpec,
    F: VolFunction,  # pylint: disable=invalid-name
    cfg: MCConfig,
    coupled: bool,
    batch: int,
    n_draws: int,
) -> Tuple[List[_Accumulator], List[_Accumulator]]:
    """Simulate one batch for every rung; returns payoff and consecutive-difference sums."""
    half = n_draws // 2 if cfg.antithetic else n_draws
    samples = []
    generator = batch_generator(cfg.seed, batch)
    if coupled:
        n_fine = rungs[-1].factor.n_steps * rungs[-1].block
        fine = generator.standard_normal((half, n_fine))
        fine_price = generator.standard_normal((half, n_fine))
    for index, rung in enumerate(rungs):
        n_steps = rung.factor.n_steps
        if coupled:
            shocks = _aggregate(fine, rung.block)
            price_shocks = _aggregate(fine_price, rung.block)
        else:
            generator = batch_generator(cfg.seed, batch, stream=index + 1)
            shocks = generator.standard_normal((half, n_steps))
            price_shocks = generator.standard_normal((half, n_steps))
        remainder = generator.standard_normal((half, n_steps - 1))
        terminal = _log_euler(rung, F, shocks, price_shocks, remainder)
        payoff = payoff_values(spec, terminal)
        if cfg.antithetic:
            mirrored = _log_euler(rung, F, -shocks, -price_shocks, -remainder)
            payoff = 0.5 * (payoff + payoff_values(spec, mirrored))
        samples.append(payoff)
    totals = []
    for payoff in samples:
        acc = _Accumulator()
        acc.add(payoff)
        totals.append(acc)
    differences = []
    for coarse, fine_payoff in zip(samples, samples[1:]):
        acc = _Accumulator()
        acc.add(fine_payoff - coarse)
        differences.append(acc)
    return totals, differences


def _simulate(
    rungs: Sequence[_Rung],
    spec: OptionSpec,
    F: VolFunction,  # pylint: disable=invalid-name
    cfg: MCConfig,
    coupled: bool = True,
) -> Tuple[List[_Accumulator], List[_Accumulator]]:
    """Run all batches in worker threads and reduce in batch order."""
    sizes = [cfg.batch_size] * (cfg.n_paths // cfg.batch_size)
    if cfg.n_paths % cfg.batch_size:
        sizes.append(cfg.n_paths % cfg.batch_size)

    def job(batch: int):
        return _batch(rungs, spec, F, cfg, coupled, batch, sizes[batch])

    started = time.time()
    with ThreadPoolExecutor(max_workers=worker_count()) as executor:
        results = list(executor.map(job, range(len(sizes))))
    totals = [_Accumulator() for _ in rungs]
    differences = [_Accumulator() for _ in rungs[1:]]
    for batch_totals, batch_differences in results:
        for acc, part in zip(totals, batch_totals):
            acc.merge(part)
        for acc, part in zip(differences, batch_differences):
            acc.merge(part)
    LOGGER.debug(
        "simulated %s paths on %s rungs in %.2fs", cfg.n_paths, len(rungs), time.time() - started
    )
    return totals, differences


def _estimate(acc: _Accumulator, cfg: MCConfig) -> MCEstimate:
    return MCEstimate(
        estimate=acc.mean, stderr=math.sqrt(acc.variance / acc.count), n_paths=cfg.n_paths
    )


def _single_rung(state: MarketState, spec: OptionSpec, model: HurstModel, cfg: MCConfig) -> _Rung:
    path = state.path
    if path is None:
        LOGGER.debug("no factor history given, sampling one with seed %s", cfg.seed)
        path = history_path(model, state.t, cfg.seed)
        state = MarketState(t=state.t, x=state.x, rho=state.rho, path=path)
    elif not math.isclose(path.model.eps, model.eps) or not math.isclose(path.model.H, model.H):
        raise DomainError("factor history was sampled under a different model")
    tau = spec.maturity - state.t
    n_steps = int(math.ceil(tau * cfg.steps_per_eps / model.eps - _RATIO_TOL))
    return _Rung(model=model, state=state, factor=ForwardFactor(path, state.t, n_steps, tau / n_steps))


def mc_price(
    state: MarketState,
    spec: OptionSpec,
    F: VolFunction,  # pylint: disable=invalid-name
    model: HurstModel,
    cfg: MCConfig,
) -> MCEstimate:
    """
    Return the Monte Carlo price E[h(X_T) | F_t] and its standard error.

    Pricing is conditional on state.path; without one a history is sampled from
    the configured seed.
    """
    _check_discretization(cfg)
    tau = spec.maturity - state.t
    if tau < 0:
        raise DomainError(f"maturity precedes current time (tau={tau})")
    if tau == 0:
        return MCEstimate(estimate=spec.payoff_value(state.x), stderr=0.0, n_paths=cfg.n_paths)
    rung = _single_rung(state, spec, model, cfg)
    totals, _ = _simulate([rung], spec, F, cfg)
    return _estimate(totals[0], cfg)


def martingale_check(
    state: MarketState,
    F: VolFunction,  # pylint: disable=invalid-name
    model: HurstModel,
    cfg: MCConfig,
    maturity: float,
) -> MCEstimate:
    """Return the Monte Carlo estimate of E[X_T | F_t], which must equal X_t."""
    identity = OptionSpec(
        strike=state.x, maturity=maturity, payoff=PayoffKind.TABLE, points=[[1.0, 1.0], [2.0, 2.0]]
    )
    return mc_price(state, identity, F, model, cfg)


def _ladder_rungs(
    state: MarketState, spec: OptionSpec, model: HurstModel, cfg: MCConfig, ladder: Sequence[float]
) -> Tuple[List[_Rung], bool]:
    """Build one rung per eps, coarsest first; fine grids nest when the ratios allow it."""
    tau = spec.maturity - state.t
    if not tau > 0:
        raise DomainError(f"convergence needs a positive time to maturity, got {tau}")
    coarse = int(math.ceil(tau * cfg.steps_per_eps / ladder[0] - _RATIO_TOL))
    ratios = [ladder[0] / eps for eps in ladder]
    multiples = [int(round(ratio)) for ratio in ratios]
    coupled = all(
        abs(ratio - multiple) < _RATIO_TOL * ratio and multiples[-1] % multiple == 0
        for ratio, multiple in zip(ratios, multiples)
    )
    if not coupled:
        LOGGER.warning(
            "common-random-number coupling unavailable for ladder %s (ratios are not nested)",
            list(ladder),
        )
    rungs = []
    for eps, multiple in zip(ladder, multiples):
        rung_model = model.with_eps(eps)
        path = history_path(rung_model, state.t, cfg.seed)
        rung_state = MarketState(t=state.t, x=state.x, rho=state.rho, path=path)
        if coupled:
            n_steps = coarse * multiple
            block = multiples[-1] // multiple
        else:
            n_steps = int(math.ceil(tau * cfg.steps_per_eps / eps - _RATIO_TOL))
            block = 1
        factor = ForwardFactor(path, state.t, n_steps, tau / n_steps)
        rungs.append(_Rung(model=rung_model, state=rung_state, factor=factor, block=block))
    return rungs, coupled


def convergence_verdict(
    H: float,  # pylint: disable=invalid-name
    residuals: Sequence[float],
    stderrs: Sequence[float],
    fit: Optional[SlopeFit],
) -> Tuple[Verdict, str]:
    """
    Return the verdict on residuals ordered from the largest eps down.

    PASS needs a slope above 1 - H and residuals decreasing within two standard
    errors, FAIL an upper confidence bound below 1 - H. A residual under the noise
    floor makes the study inconclusive.
    """
    order = 1.0 - H
    floor = [r < NOISE_FLOOR_SE * s for r, s in zip(residuals, stderrs)]
    if any(floor) or fit is None:
        return Verdict.INCONCLUSIVE, "residual below the Monte Carlo noise floor"
    if fit.ci_high < order:
        return Verdict.FAIL, f"slope {fit.slope:.3f} (upper bound {fit.ci_high:.3f}) below {order:.3f}"
    decreasing = all(
        later - earlier < NOISE_FLOOR_SE * math.hypot(s_earlier, s_later)
        for earlier, later, s_earlier, s_later in zip(
            residuals, residuals[1:], stderrs, stderrs[1:]
        )
    )
    if fit.slope > order and decreasing:
        return Verdict.PASS, f"slope {fit.slope:.3f} above {order:.3f}"
    if not decreasing:
        return Verdict.INCONCLUSIVE, "residuals do not decrease along the ladder"
    return Verdict.INCONCLUSIVE, f"slope {fit.slope:.3f} not resolved above {order:.3f}"


def _safe_fit(eps: Sequence[float], values: Sequence[float]) -> Optional[SlopeFit]:
    if min(values) <= 0:
        return None
    return loglog_slope(eps, values)


def convergence_study(
    state: MarketState,
    spec: OptionSpec,
    F: VolFunction,  # pylint: disable=invalid-name
    model: HurstModel,
    cfg: MCConfig,
) -> ConvergenceReport:
    """
    Return |MC - corrected price| along the eps ladder with the fitted order.

    Every rung samples its own factor history from the configured seed; all rungs
    share the driving increments when the grids nest.
    """
    _check_discretization(cfg)
    ladder = sorted({float(eps) for eps in cfg.eps_ladder}, reverse=True)
    if len(ladder) < MIN_LADDER:
        raise InsufficientDataError(
            f"convergence study needs at least {MIN_LADDER} eps values, got {len(ladder)}"
        )
    moments(F, model)
    rungs, coupled = _ladder_rungs(state, spec, model, cfg, ladder)
    totals, _ = _simulate(rungs, spec, F, cfg, coupled)
    rows = []
    for rung, acc in zip(rungs, totals):
        estimate = _estimate(acc, cfg)
        decomposition = corrected_price(rung.state, spec, F, rung.model)
        residual = abs(estimate.estimate - decomposition.total)
        rows.append(
            LadderRow(
                eps=rung.model.eps,
                mc_price=estimate.estimate,
                stderr=estimate.stderr,
                corrected=decomposition.total,
                uncorrected=decomposition.q0,
                residual=residual,
                uncorrected_residual=abs(estimate.estimate - decomposition.q0),
                phi=decomposition.phi,
                resolved=residual >= NOISE_FLOOR_SE * estimate.stderr,
            )
        )
        LOGGER.debug(
            "eps=%s mc=%.6f +- %.2e corrected=%.6f", rung.model.eps, estimate.estimate,
            estimate.stderr, decomposition.total,
        )
    residuals = [row.residual for row in rows]
    fit = _safe_fit(ladder, residuals)
    uncorrected_fit = _safe_fit(ladder, [row.uncorrected_residual for row in rows])
    verdict, message = convergence_verdict(model.H, residuals, [row.stderr for row in rows], fit)
    if verdict == Verdict.INCONCLUSIVE:
        LOGGER.warning("convergence study inconclusive: %s", message)
    else:
        LOGGER.info("convergence study %s: %s", verdict.value, message)
    return ConvergenceReport(
        H=model.H,
        rows=rows,
        fit=fit,
        uncorrected_fit=uncorrected_fit,
        verdict=verdict,
        coupled=coupled,
        message=message,
    )


def ladder_difference_variance(
    state: MarketState,
    spec: OptionSpec,
    F: VolFunction,  # pylint: disable=invalid-name
    model: HurstModel,
    cfg: MCConfig,
    coupled: bool = True,
) -> float:
    """Return Var(payoff on rung 2 - payoff on rung 1) with or without shared increments."""
    _check_discretization(cfg)
    ladder = sorted({float(eps) for eps in cfg.eps_ladder}, reverse=True)
    if len(ladder) < 2:
        raise InsufficientDataError("difference variance needs two eps values")
    rungs, nested = _ladder_rungs(state, spec, model, cfg, ladder[:2])
    _, differences = _simulate(rungs, spec, F, cfg, coupled and nested)
    return differences[0].variance


def _phi_pair(
    sampler: FouSampler,
    F: VolFunction,  # pylint: disable=invalid-name
    horizon: float,
    seed: int,
    index: int,
) -> Tuple[float, float]:
    path = sampler.sample_one(seed, index)
    state = MarketState(t=0.0, x=1.0, path=path)
    first = phi_correction(state, OptionSpec(strike=1.0, maturity=horizon), F, path.model)
    second = phi_correction(
        state,
        OptionSpec(strike=1.0, maturity=SECOND_MATURITY_FACTOR * horizon),
        F,
        path.model,
    )
    return first, second


def _map(func: Callable, items: Sequence) -> list:
    with ThreadPoolExecutor(max_workers=worker_count()) as executor:
        return list(executor.map(func, items))


def fourth_moment(
    F: VolFunction,  # pylint: disable=invalid-name
    model: HurstModel,
    horizon: float,
    cfg: MCConfig,
) -> float:
    """Return the sample E[(int_0^horizon (F(Z_s)^2 - sigma_bar^2) ds)^4]."""
    sigma_bar_sq = moments(F, model).sigma_bar_sq
    # sampler grids need at least STEPS_PER_EPS points per eps
    per_eps = max(cfg.steps_per_eps, STEPS_PER_EPS)
    n_steps = int(math.ceil(horizon * per_eps / model.eps - _RATIO_TOL))
    grid = np.linspace(0.0, horizon, n_steps + 1)
    sampler = FouSampler(model, grid, SamplerMethod.CIRCULANT, keep_noise=False)
    starts = range(0, cfg.n_paths, cfg.batch_size)

    def job(start: int) -> np.ndarray:
        indices = range(start, min(start + cfg.batch_size, cfg.n_paths))
        z = sampler.sample_matrix(cfg.seed, indices)
        return integrate.trapezoid(F(z) ** 2 - sigma_bar_sq, grid, axis=1)

    integrals = np.concatenate(_map(job, starts))
    return float(np.mean(integrals ** 4))


def moment_study(
    F: VolFunction,  # pylint: disable=invalid-name
    model: HurstModel,
    horizon: float,
    cfg: MCConfig,
) -> MomentReport:
    """
    Return ensemble checks of phi and of the integrated volatility.

    phi_{0,horizon} and phi_{0,1.5 horizon} are computed on n_paths sampled histories
    at the smallest eps of the ladder (model.eps without one). The fourth moment of
    int (F^2 - sigma_bar^2) is fitted in eps over the ladder.
    """
    _check_discretization(cfg)
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    ladder = sorted({float(eps) for eps in cfg.eps_ladder}, reverse=True)
    if len(ladder) < 3:
        ladder = [model.eps * 0.5 ** k for k in range(4)]
    eps = min(cfg.eps_ladder) if cfg.eps_ladder else model.eps
    small = model.with_eps(eps)
    step = eps / STEPS_PER_EPS
    sampler = FouSampler(small, [-step, 0.0])
    moments(F, small)
    started = time.time()
    pairs = np.array(
        _map(lambda index: _phi_pair(sampler, F, horizon, cfg.seed, index), range(cfg.n_paths))
    )
    LOGGER.debug("computed phi on %s histories in %.2fs", cfg.n_paths, time.time() - started)
    sigma_phi_sq = sigma_phi_squared(F, small)
    scale = eps ** (2.0 * small.H - 2.0)
    variance_ratio = scale * np.var(pairs[:, 0], ddof=1) / horizon ** (2.0 * small.H) / sigma_phi_sq
    second = SECOND_MATURITY_FACTOR * horizon
    sample_cov = np.cov(pairs[:, 0], pairs[:, 1])[0, 1]
    predicted = phi_covariance(0.0, 0.0, horizon, second, small.H, sigma_phi_sq)
    phi_mean, phi_stderr = mean_and_stderr(pairs[:, 0])
    values = [fourth_moment(F, model.with_eps(value), horizon, cfg) for value in ladder]
    fit = _safe_fit(ladder, values)
    report = MomentReport(
        H=small.H,
        eps=eps,
        horizon=horizon,
        n_histories=cfg.n_paths,
        sigma_phi_sq=sigma_phi_sq,
        variance_ratio=float(variance_ratio),
        phi_mean=phi_mean,
        phi_mean_stderr=phi_stderr,
        covariance_ratio=float(scale * sample_cov / predicted),
        second_maturity=second,
        fourth_moments={"eps": list(ladder), "moment": values},
        fourth_moment_fit=fit,
        fourth_moment_bound=4.0 - 4.0 * small.H,
    )
    LOGGER.info(
        "phi variance ratio %.3f, covariance ratio %.3f, fourth-moment slope %s",
        report.variance_ratio,
        report.covariance_ratio,
        "n/a" if fit is None else f"{fit.slope:.3f}",
    )
    return report
