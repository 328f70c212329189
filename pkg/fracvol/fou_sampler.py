"""
Stationary sampling of the eps-scaled fOU factor and its conditional laws.

A path is driven by Brownian increments on a noise grid: uniform cells over the
path and a recent window, geometrically growing cells further back. The factor is

    Z_t = sigma_ou * sum_j w_j(t) dW_j + r_t,

with w_j(t) the cell average of the scaled kernel K^eps(t - u) and r_t the part
of Z not spanned by the stored increments. Method "cholesky" draws r exactly from
its conditional covariance, "moving-average" sets r = 0 and "circulant" builds
paths from fractional Gaussian noise by FFT without storing any increments.
"""
import logging
import math
import time
from typing import Optional, Sequence

import numpy as np
from scipy import linalg, signal

from fracvol.constants import (
    CHOLESKY_MAX_POINTS,
    CIRCULANT_BURN_IN_EPS,
    FAR_HISTORY_EPS,
    FAR_HISTORY_GROWTH,
    HISTORY_SPAN_EPS,
    HISTORY_TOLERANCE,
    JITTER_LADDER,
    STEPS_PER_EPS,
)
from fracvol.fou_core import fou_correlation, kernel_evaluator, kernel_l2_mass, kernel_l2_tail
from fracvol.helpers.errors import DomainError, HistoryError, NotPositiveDefiniteError
from fracvol.helpers.output import csv_from_columns
from fracvol.helpers.typing import ArrayLike, FouPaths
from fracvol.models.fou_path import ConditionalLaw, FouPath, NoiseGrid, SamplerMethod
from fracvol.models.hurst import HurstModel

LOGGER = logging.getLogger("fou_sampler")

_ROW_CHUNK = 256
_GRID_RTOL = 1e-9


def path_generator(seed: int, index: int) -> np.random.Generator:
    """Return the counter-based generator owned by stream (seed, index)."""
    if seed < 0 or index < 0:
        raise DomainError(f"seed and stream index must be non-negative, got {seed}, {index}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def check_grid(model: HurstModel, grid: ArrayLike) -> np.ndarray:
    """Validate a path grid: strictly increasing with spacing at most eps/20."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise DomainError("grid needs at least two time points")
    steps = np.diff(grid)
    if np.any(steps <= 0):
        raise DomainError("grid times must be strictly increasing")
    limit = model.eps / STEPS_PER_EPS
    if steps.max() > limit * (1.0 + _GRID_RTOL):
        raise DomainError(
            f"grid spacing {steps.max():.3e} exceeds eps/{STEPS_PER_EPS} = {limit:.3e}"
        )
    return grid


def is_uniform(grid: np.ndarray) -> bool:
    """Return True for an equally spaced grid."""
    steps = np.diff(grid)
    return bool(np.allclose(steps, steps[0], rtol=1e-9, atol=0.0))


def build_noise_grid(
    grid: np.ndarray,
    eps: float,
    history_span_eps: float = HISTORY_SPAN_EPS,
    far_span_eps: float = FAR_HISTORY_EPS,
    growth: float = FAR_HISTORY_GROWTH,
) -> NoiseGrid:
    """Return the noise cells: far geometric cells, a uniform window and the path cells."""
    if history_span_eps < 0 or far_span_eps < history_span_eps:
        raise DomainError("need 0 <= history_span <= far_span")
    if growth <= 1.0:
        raise DomainError(f"cell growth must exceed 1, got {growth}")
    step = grid[1] - grid[0]
    n_recent = int(math.ceil(history_span_eps * eps / step - 1e-9))
    recent_span = n_recent * step
    recent = grid[0] - step * np.arange(n_recent, 0, -1)
    far = np.empty(0)
    deficit = far_span_eps * eps - recent_span
    if deficit > 0:
        count = int(math.ceil(math.log1p(deficit * (growth - 1.0) / (step * growth)) / math.log(growth)))
        lags = recent_span + np.cumsum(step * growth ** np.arange(1, count + 1))
        far = grid[0] - lags[::-1]
    edges = np.concatenate((far, recent, grid))
    return NoiseGrid(edges=edges, history_span=recent_span, far_span=float(grid[0] - edges[0]))


class MovingAverage:
    """Cell-averaged moving-average weights of the scaled kernel over a noise grid."""

    def __init__(self, model: HurstModel, noise: NoiseGrid) -> None:
        """Initialize for a model and its noise cells."""
        self.model = model
        self.noise = noise
        self._evaluator = kernel_evaluator(model.H)
        self._scale = model.sigma_ou * math.sqrt(model.eps)

    def weights(self, times: ArrayLike, n_cells: Optional[int] = None) -> np.ndarray:
        """
        Return w_j(t) for every time (rows) and the first n_cells cells (columns).

        w_j(t) = sigma_ou sqrt(eps) [I((t - lo_j)/eps) - I((t - hi_j)/eps)] / (hi_j - lo_j)
        with I the primitive of K; cells after t get zero weight.
        """
        times = np.atleast_1d(np.asarray(times, dtype=float))
        n_cells = self.noise.size if n_cells is None else n_cells
        lower = self.noise.edges[:n_cells]
        upper = self.noise.edges[1 : n_cells + 1]
        widths = upper - lower
        eps = self.model.eps
        out = np.empty((times.size, n_cells))
        for start in range(0, times.size, _ROW_CHUNK):
            rows = times[start : start + _ROW_CHUNK, None]
            near = self._evaluator.primitive(np.maximum(rows - lower[None, :], 0.0) / eps)
            far = self._evaluator.primitive(np.maximum(rows - upper[None, :], 0.0) / eps)
            out[start : start + _ROW_CHUNK] = self._scale * (near - far) / widths[None, :]
        return out


def stationary_covariance(model: HurstModel, times: np.ndarray) -> np.ndarray:
    """Return sigma_ou^2 C_Z(|t_i - t_j|/eps) over all pairs of times."""
    lags = np.abs(times[:, None] - times[None, :]) / model.eps
    unique, inverse = np.unique(np.round(lags, 12), return_inverse=True)
    values = fou_correlation(unique, model.H, method="time-domain")
    return model.sigma_ou_sq * np.asarray(values)[inverse].reshape(lags.shape)


def cholesky_factor(matrix: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Return the lower Cholesky factor, walking the jitter ladder on failure."""
    identity = np.eye(matrix.shape[0])
    for jitter in JITTER_LADDER:
        try:
            factor = linalg.cholesky(matrix + jitter * scale * identity, lower=True)
        except linalg.LinAlgError:
            continue
        if jitter:
            LOGGER.warning("cholesky factorization needed diagonal jitter %.1e", jitter * scale)
        return factor
    min_eigenvalue = float(linalg.eigvalsh(matrix)[0])
    raise NotPositiveDefiniteError(min_eigenvalue)


class FouSampler:
    """Precomputed sampling operator for one model and grid; paths are drawn per stream."""

    def __init__(
        self,
        model: HurstModel,
        grid: ArrayLike,
        method: SamplerMethod = SamplerMethod.AUTO,
        history_span_eps: float = HISTORY_SPAN_EPS,
        far_span_eps: float = FAR_HISTORY_EPS,
        keep_noise: bool = True,
    ) -> None:
        """Validate the grid and build the operator for the resolved method."""
        self.model = model
        self.grid = check_grid(model, grid)
        self.keep_noise = keep_noise
        self.method = self._resolve_method(SamplerMethod(method))
        self.noise: Optional[NoiseGrid] = None
        self._weights = None
        self._residual = None
        self._residual_var = None
        self._eigenvalues = None
        started = time.time()
        if self.method == SamplerMethod.CIRCULANT:
            self._setup_circulant()
        else:
            self.noise = build_noise_grid(self.grid, model.eps, history_span_eps, far_span_eps)
            self._weights = MovingAverage(model, self.noise).weights(self.grid)
            if self.method == SamplerMethod.CHOLESKY:
                self._setup_residual()
            else:
                self._residual_var = np.zeros(self.grid.size)
        LOGGER.debug(
            "prepared %s sampler for %s points in %.2fs",
            self.method.value,
            self.grid.size,
            time.time() - started,
        )

    def _resolve_method(self, method: SamplerMethod) -> SamplerMethod:
        if method == SamplerMethod.AUTO:
            if self.grid.size <= CHOLESKY_MAX_POINTS:
                return SamplerMethod.CHOLESKY
            method = SamplerMethod.CIRCULANT
        if method == SamplerMethod.CIRCULANT and not is_uniform(self.grid):
            raise DomainError("circulant sampling needs an equally spaced grid")
        return method

    def _setup_residual(self) -> None:
        widths = self.noise.widths
        spanned = (self._weights * widths[None, :]) @ self._weights.T
        residual = stationary_covariance(self.model, self.grid) - spanned
        self._residual_var = np.clip(np.diag(residual), 0.0, None)
        self._residual = cholesky_factor(residual, self.model.sigma_ou_sq)

    def _setup_circulant(self) -> None:
        step = self.grid[1] - self.grid[0]
        self._burn_in = int(math.ceil(CIRCULANT_BURN_IN_EPS * self.model.eps / step))
        n_steps = self._burn_in + self.grid.size - 1
        two_h = 2.0 * self.model.H
        lags = np.arange(n_steps + 1, dtype=float)
        autocov = 0.5 * self.model.sigma_H_sq * step ** two_h * (
            np.abs(lags + 1.0) ** two_h + np.abs(lags - 1.0) ** two_h - 2.0 * lags ** two_h
        )
        row = np.concatenate((autocov, autocov[-2:0:-1]))
        eigenvalues = np.fft.fft(row).real
        if eigenvalues.min() < -1e-10 * eigenvalues.max():
            raise NotPositiveDefiniteError(float(eigenvalues.min()))
        self._eigenvalues = np.clip(eigenvalues, 0.0, None)
        self._n_steps = n_steps

    def _circulant_z(self, generator: np.random.Generator) -> np.ndarray:
        size = self._eigenvalues.size
        noise = generator.standard_normal(size) + 1j * generator.standard_normal(size)
        fgn = np.fft.fft(np.sqrt(self._eigenvalues / size) * noise).real[: self._n_steps]
        eps = self.model.eps
        step = self.grid[1] - self.grid[0]
        decay = math.exp(-step / eps)
        # cell-averaged exponential weight of each fBm increment
        gain = eps ** (-self.model.H) * (1.0 - decay) * eps / step
        start = self.model.sigma_ou * generator.standard_normal()
        values, _ = signal.lfilter([gain], [1.0, -decay], fgn, zi=[decay * start])
        return np.concatenate(([start], values))[self._burn_in :]

    def sample_one(self, seed: int, index: int) -> FouPath:
        """Draw the path owned by stream (seed, index)."""
        generator = path_generator(seed, index)
        if self.method == SamplerMethod.CIRCULANT:
            return FouPath(
                model=self.model,
                grid=self.grid,
                z=self._circulant_z(generator),
                seed=seed,
                index=index,
                method=self.method,
            )
        increments = np.sqrt(self.noise.widths) * generator.standard_normal(self.noise.size)
        z = self._weights @ increments
        if self._residual is not None:
            unresolved = self._residual @ generator.standard_normal(self.grid.size)
        else:
            unresolved = np.zeros(self.grid.size)
        z = z + unresolved
        if not self.keep_noise:
            return FouPath(
                model=self.model, grid=self.grid, z=z, seed=seed, index=index, method=self.method
            )
        return FouPath(
            model=self.model,
            grid=self.grid,
            z=z,
            seed=seed,
            index=index,
            method=self.method,
            noise=self.noise,
            dW=increments,
            unresolved=unresolved,
            unresolved_var=self._residual_var,
        )

    def sample(self, seed: int, indices: Sequence[int]) -> FouPaths:
        """Draw the paths of the given stream indices."""
        return [self.sample_one(seed, index) for index in indices]

    def sample_matrix(self, seed: int, indices: Sequence[int]) -> np.ndarray:
        """Draw the factor values only, one row per stream index."""
        return np.vstack([self.sample_one(seed, index).z for index in indices])


def sample_paths(
    model: HurstModel,
    grid: ArrayLike,
    n_paths: int,
    seed: int,
    method: SamplerMethod = SamplerMethod.AUTO,
    **kwargs,
) -> FouPaths:
    """Draw n_paths stationary fOU paths on grid; path i uses stream (seed, i)."""
    if n_paths < 1:
        raise DomainError(f"n_paths must be at least 1, got {n_paths}")
    sampler = FouSampler(model, grid, method, **kwargs)
    started = time.time()
    paths = sampler.sample(seed, range(n_paths))
    LOGGER.debug("sampled %s paths in %.2fs", n_paths, time.time() - started)
    return paths


def sample_ou_paths(grid: ArrayLike, eps: float, n_paths: int, seed: int) -> np.ndarray:
    """
    Draw stationary standard OU paths (the H = 1/2 comparison process).

    dZ = -Z/eps dt + eps^(-1/2) dW with stationary variance 1/2 and correlation
    exp(-|s|/eps); the exact AR(1) recursion is used on any grid.
    """
    grid = np.asarray(grid, dtype=float)
    if eps <= 0:
        raise DomainError(f"epsilon must be positive, got {eps}")
    if grid.size < 1 or np.any(np.diff(grid) <= 0):
        raise DomainError("grid times must be strictly increasing")
    decay = np.exp(-np.diff(grid) / eps)
    spread = np.sqrt(0.5 * (1.0 - decay ** 2))
    out = np.empty((n_paths, grid.size))
    for index in range(n_paths):
        generator = path_generator(seed, index)
        shocks = generator.standard_normal(grid.size)
        out[index, 0] = math.sqrt(0.5) * shocks[0]
        for step in range(1, grid.size):
            out[index, step] = decay[step - 1] * out[index, step - 1] + spread[step - 1] * shocks[step]
    return out


def ou_correlation(s: ArrayLike, eps: float = 1.0) -> ArrayLike:
    """Return the OU correlation exp(-|s|/eps)."""
    value = np.exp(-np.abs(np.asarray(s, dtype=float)) / eps)
    return float(value) if np.ndim(value) == 0 else value


def _grid_index(path: FouPath, t: float) -> int:
    index = int(np.argmin(np.abs(path.grid - t)))
    if not math.isclose(path.grid[index], t, rel_tol=1e-12, abs_tol=1e-12 * path.model.eps):
        raise DomainError(f"conditioning time {t} is not a grid time")
    return index


def check_history(path: FouPath, t: float, tolerance: float = HISTORY_TOLERANCE) -> int:
    """Return the grid index of t after checking the retained history suffices."""
    if not path.conditionable:
        raise HistoryError(
            f"path was sampled with method {path.method.value} and stores no driving increments"
        )
    index = _grid_index(path, t)
    span = (path.grid[index] - path.noise.edges[0]) / path.model.eps
    tail = float(kernel_l2_tail(span, path.model.H))
    if tail > tolerance:
        raise HistoryError(
            f"history of {span:.4g} eps leaves tail variance {tail:.2e} above {tolerance:.1e}"
        )
    return index


def conditional_means(
    path: FouPath, t: float, s: ArrayLike, tolerance: float = HISTORY_TOLERANCE
) -> np.ndarray:
    """
    Return E[Z_s | F_t] for an array of times s >= t.

    The moving average of the increments up to t, plus the projection of the
    present unresolved component onto Z_s.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s < t):
        raise DomainError("conditional moments need s >= t")
    index = check_history(path, t, tolerance)
    model = path.model
    n_cells = path.noise.size - (path.grid.size - 1 - index)
    average = MovingAverage(model, path.noise)
    weights = average.weights(s, n_cells)
    means = weights @ path.dW[:n_cells]
    variance = path.unresolved_var[index]
    if variance > 0:
        present = average.weights([path.grid[index]], n_cells)[0]
        cross = model.sigma_ou_sq * np.asarray(
            fou_correlation((s - path.grid[index]) / model.eps, model.H, method="time-domain")
        ) - (weights * path.noise.widths[:n_cells][None, :]) @ present
        means = means + cross / variance * path.unresolved[index]
    return means


def conditional_std(model: HurstModel, lag: ArrayLike) -> ArrayLike:
    """Return sigma_ou (int_0^{lag/eps} K^2)^(1/2), the conditional spread after lag."""
    lag = np.asarray(lag, dtype=float)
    if np.any(lag < 0):
        raise DomainError("lag must be non-negative")
    value = model.sigma_ou * np.sqrt(np.clip(kernel_l2_mass(lag / model.eps, model.H), 0.0, None))
    return float(value) if np.ndim(value) == 0 else value


def conditional_law(
    path: FouPath, t: float, s: float, tolerance: float = HISTORY_TOLERANCE
) -> ConditionalLaw:
    """Return the Gaussian law of Z_s given the path history up to t."""
    if s < t:
        raise DomainError(f"need s >= t, got s={s}, t={t}")
    mean = float(conditional_means(path, t, [s], tolerance)[0])
    return ConditionalLaw(mean=mean, std=conditional_std(path.model, s - t))


def reconstruct(path: FouPath) -> np.ndarray:
    """Rebuild z from the stored increments and unresolved components."""
    if not path.conditionable:
        raise HistoryError("path stores no driving increments")
    weights = MovingAverage(path.model, path.noise).weights(path.grid)
    return weights @ path.dW + path.unresolved


def path_to_csv(path: FouPath) -> str:
    """Return the time,z CSV export of a path with H, eps and seed in the header."""
    metadata = {
        "H": path.model.H,
        "eps": path.model.eps,
        "seed": path.seed,
        "index": path.index,
        "method": path.method.value,
    }
    return csv_from_columns(metadata, {"time": path.grid, "z": path.z})
