"""
Data series behind the published figures.

Each preset returns named columns of equal length. Caption parameters are fixed
here (a_F = 0.1, phi amplitude 0.04, moneyness 0.9/1.0/1.1); the Hurst exponent
comes from the run configuration, whose default is the caption value 0.6.
"""
import logging
from typing import Callable, Dict, Optional

import numpy as np

from fracvol.constants import (
    FIGURE_AMPLITUDE,
    FIGURE_MONEYNESS,
    FIGURE_NUMBERS,
    FIGURE_SKEW,
)
from fracvol.fou_core import fou_correlation
from fracvol.fou_sampler import ou_correlation, sample_ou_paths, sample_paths
from fracvol.helpers.errors import ConfigValidationError
from fracvol.implied_vol import iv_correction_band
from fracvol.models.hurst import HurstModel
from fracvol.models.run_config import RunConfig
from fracvol.models.tt_grid import TTCovarianceGrid
from fracvol.pricer import correction_band
from fracvol.tt_field import (
    corr_fixed_maturity,
    corr_fixed_time,
    corr_fixed_ttm,
    fixed_maturity_grid,
    fixed_time_grid,
    fixed_ttm_grid,
    fixed_ttm_tail,
    sample_field,
)

LOGGER = logging.getLogger("figure_manager")

Columns = Dict[str, np.ndarray]

REALIZATION_SPAN = 10.0  # factor realizations run over (0, 10) with eps = 1
REALIZATION_STEPS = 400
CURVE_POINTS = 200
SURFACE_POINTS = 41


def realization_columns(
    grid: TTCovarianceGrid, n: int, seed: int, axis_name: Optional[str] = None
) -> Columns:
    """Return the transect coordinates and n field realizations."""
    draws = sample_field(grid, n, seed)
    columns = {
        "t": np.asarray(grid.times),
        "T": np.asarray(grid.maturities),
    }
    if axis_name:
        columns[axis_name] = np.asarray(grid.axis)
    if n == 1:
        columns["psi"] = draws[0]
    else:
        for index in range(n):
            columns[f"psi_{index}"] = draws[index]
    return columns


class FigureManager:
    """Builds the data series of one figure preset from a run configuration."""

    def __init__(self, config: RunConfig) -> None:
        """Initialize with the validated run configuration."""
        self.config = config
        self.H = config.model.hurst  # pylint: disable=invalid-name
        self._presets: Dict[int, Callable[[], Columns]] = {
            1: self.factor_realizations,
            3: self.price_correction,
            4: self.price_correction_surface,
            5: self.iv_correction,
            6: self.iv_correction_surface,
            7: self.fixed_maturity_correlation,
            8: self.fixed_maturity_realization,
            9: self.fixed_ttm_correlation,
            10: self.fixed_ttm_loglog,
            11: self.fixed_ttm_realization,
            12: self.fixed_time_realization,
            13: self.fixed_time_correlation,
        }

    @property
    def presets(self):
        """Return the available figure numbers."""
        return sorted(self._presets)

    def columns(self, figure: int) -> Columns:
        """Return the columns of a figure preset."""
        if figure not in FIGURE_NUMBERS:
            raise ConfigValidationError(
                "figure", f"must be one of {list(FIGURE_NUMBERS)}, got {figure}"
            )
        LOGGER.debug("building figure %s at H=%s", figure, self.H)
        return self._presets[figure]()

    @property
    def _grid_size(self) -> int:
        return self.config.field.grid_size

    @property
    def _seed(self) -> int:
        return self.config.seed

    def factor_realizations(self) -> Columns:
        """fOU and OU realizations with eps = 1 and both correlation functions."""
        model = HurstModel(H=self.H, eps=1.0)
        grid = np.linspace(0.0, REALIZATION_SPAN, REALIZATION_STEPS + 1)
        fou = sample_paths(model, grid, 1, self._seed)[0]
        return {
            "time": grid,
            "fou": fou.z,
            "ou": sample_ou_paths(grid, 1.0, 1, self._seed)[0],
            "fou_corr": fou_correlation(grid, self.H, method="time-domain"),
            "ou_corr": ou_correlation(grid, 1.0),
        }

    def _bands(self, band: Callable, log_moneyness: bool) -> Columns:
        tau_rel = np.geomspace(0.01, 10.0, CURVE_POINTS)
        columns = {"tau_rel": tau_rel}
        spreads = {}
        for moneyness in FIGURE_MONEYNESS:
            value = np.log(moneyness) if log_moneyness else moneyness
            mean, spread = band(tau_rel, value, FIGURE_SKEW, FIGURE_AMPLITUDE, self.H)
            columns[f"mean_{moneyness}"] = mean
            spreads[f"sd_{moneyness}"] = spread
        columns.update(spreads)
        return columns

    def _surface(self, band: Callable, log_moneyness: bool) -> Columns:
        grid_tau, grid_m = np.meshgrid(
            np.geomspace(0.05, 5.0, SURFACE_POINTS),
            np.linspace(0.8, 1.2, SURFACE_POINTS),
            indexing="ij",
        )
        grid_tau, grid_m = grid_tau.ravel(), grid_m.ravel()
        value = np.log(grid_m) if log_moneyness else grid_m
        mean, spread = band(grid_tau, value, FIGURE_SKEW, FIGURE_AMPLITUDE, self.H)
        return {
            "tau_rel": grid_tau,
            "moneyness": grid_m,
            "mean": mean,
            "plus_sd": mean + spread,
            "minus_sd": mean - spread,
        }

    def price_correction(self) -> Columns:
        """(Q - Q0)/K against tau/tau_bar, mean and sd per moneyness."""
        return self._bands(correction_band, log_moneyness=False)

    def price_correction_surface(self) -> Columns:
        """Mean price correction over (tau/tau_bar, K/x) with the one-sd band."""
        return self._surface(correction_band, log_moneyness=False)

    def iv_correction(self) -> Columns:
        """Relative implied-volatility correction against tau/tau_bar."""
        return self._bands(iv_correction_band, log_moneyness=True)

    def iv_correction_surface(self) -> Columns:
        """Mean implied-volatility correction over (tau/tau_bar, K/x)."""
        return self._surface(iv_correction_band, log_moneyness=True)

    def fixed_maturity_correlation(self) -> Columns:
        """C(delta_1) on (-1, 1)."""
        delta = np.linspace(-0.99, 0.99, self._grid_size)
        return {"delta": delta, "corr": corr_fixed_maturity(delta, self.H)}

    def fixed_maturity_realization(self) -> Columns:
        """psi_1(tau; 1) over times to maturity in (0, 1]."""
        taus = np.linspace(1.0 / self._grid_size, 1.0, self._grid_size)
        return realization_columns(
            fixed_maturity_grid(taus, self.H),
            self.config.field.realizations,
            self._seed,
            "tau",
        )

    def fixed_ttm_correlation(self) -> Columns:
        """C_2(delta_2) on [-4, 4]."""
        delta = np.linspace(-4.0, 4.0, self._grid_size)
        return {"delta": delta, "corr": corr_fixed_ttm(delta, self.H)}

    def fixed_ttm_loglog(self) -> Columns:
        """C_2 on log-spaced separations with its |delta|^(2H-2) reference."""
        delta = np.geomspace(0.1, 1.0e3, self._grid_size)
        return {
            "delta": delta,
            "corr": corr_fixed_ttm(delta, self.H),
            "reference": fixed_ttm_tail(delta, self.H),
        }

    def fixed_ttm_realization(self) -> Columns:
        """psi_2(t; 1) over current times in [0, 4]."""
        times = np.linspace(0.0, 4.0, self._grid_size)
        return realization_columns(
            fixed_ttm_grid(times, self.H), self.config.field.realizations, self._seed
        )

    def fixed_time_realization(self) -> Columns:
        """psi_3(tau; 1) over times to maturity in (0, 1]."""
        taus = np.linspace(1.0 / self._grid_size, 1.0, self._grid_size)
        return realization_columns(
            fixed_time_grid(taus, self.H, current=1.0),
            self.config.field.realizations,
            self._seed,
            "tau",
        )

    def fixed_time_correlation(self) -> Columns:
        """C_3(delta_3) on [-4, 4]."""
        delta = np.linspace(-4.0, 4.0, self._grid_size)
        return {"delta": delta, "corr": corr_fixed_time(delta, self.H)}
