"""Main fracvol class."""

import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from fracvol.constants import JSON_COMMANDS
from fracvol.fou_sampler import sample_paths
from fracvol.helpers.errors import ConfigValidationError
from fracvol.helpers.output import csv_from_columns, json_text, write_artifact
from fracvol.helpers.util import run_background_task, worker_count
from fracvol.implied_vol import iv_lattice, mean_iv_surface
from fracvol.managers.config import ConfigManager
from fracvol.managers.figures import FigureManager, realization_columns
from fracvol.mc_oracle import MIN_LADDER, convergence_study, history_path, moment_study
from fracvol.models.fou_path import SamplerMethod
from fracvol.models.run_config import RunConfig
from fracvol.models.tt_grid import FieldMode
from fracvol.pricer import corrected_price
from fracvol.tt_field import fixed_maturity_grid, fixed_time_grid, fixed_ttm_grid, free_grid
from fracvol.vol_model import moments

LOGGER = logging.getLogger("fracvol")

IV_FIGURES = (3, 4, 5, 6)
FIELD_FIGURES = (7, 8, 9, 10, 11, 12, 13)
TTM_SPAN = 4.0  # fixed-ttm transects cover 4 times to maturity
PRICE_COLUMNS = (
    "strike",
    "maturity",
    "tau_rel",
    "moneyness",
    "q0",
    "phi",
    "random_term",
    "skew_term",
    "total",
    "a_F",
    "tau_bar",
)
LADDER_COLUMNS = (
    "eps",
    "mc_price",
    "stderr",
    "corrected",
    "uncorrected",
    "residual",
    "uncorrected_residual",
    "phi",
    "resolved",
)


@dataclass
class CommandOutput:
    """Columns for CSV, a document for JSON and an optional summary for the header."""

    columns: Dict[str, Sequence[float]]
    document: Any
    summary: Optional[Dict[str, Any]] = None


def _rows_to_columns(rows: List[Dict[str, Any]], names: Sequence[str]) -> Dict[str, List[float]]:
    return {name: [float(row[name]) for row in rows] for name in names}


class FracVol:
    """Main fracvol object: runs the commands of one validated configuration."""

    def __init__(self, config_manager: ConfigManager) -> None:
        """Initialize with a loaded ConfigManager."""
        self._config_manager = config_manager
        self._executor: Optional[ThreadPoolExecutor] = None
        self._commands: Dict[str, Callable[[], CommandOutput]] = {
            "simulate": self.simulate,
            "price": self.price,
            "ivsurface": self.ivsurface,
            "ttfield": self.ttfield,
            "validate": self.validate,
            "figures": self.figures,
        }

    async def start(self) -> None:
        """Start the worker pool."""
        self._executor = ThreadPoolExecutor(worker_count())

    async def stop(self) -> None:
        """Shut the worker pool down."""
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    @property
    def config(self) -> RunConfig:
        """Return the run configuration."""
        return self._config_manager.config

    @property
    def output_format(self) -> str:
        """Return the artifact format, defaulting per command."""
        if self.config.output.format:
            return self.config.output.format
        return "json" if self.config.command in JSON_COMMANDS else "csv"

    async def run_command(self, command: Optional[str] = None) -> str:
        """Run a command in the worker pool and write its artifact; return the text."""
        command = command or self.config.command
        if command not in self._commands:
            raise ConfigValidationError("command", f"unknown command {command!r}")
        started = time.time()
        text = await run_background_task(self.render, command, executor=self._executor)
        if self.config.output.path:
            await write_artifact(self.config.output.path, text)
        else:
            sys.stdout.write(text)
        LOGGER.info("%s finished in %.2fs", command, time.time() - started)
        return text

    def render(self, command: str) -> str:
        """Return the artifact text of a command."""
        output = self._commands[command]()
        metadata = self._config_manager.metadata()
        if self.output_format == "json":
            return json_text(metadata, output.document)
        if output.summary:
            metadata["summary"] = output.summary
        return csv_from_columns(metadata, output.columns)

    def _history_state(self):
        config = self.config
        path = history_path(self._config_manager.model, config.market.t, config.seed)
        return config.market.to_state(path)

    def _longest_tau(self) -> float:
        tau = max(self.config.lattice.maturities) - self.config.market.t
        if not tau > 0:
            raise ConfigValidationError(
                "lattice.maturities", "needs a maturity after the current time"
            )
        return tau

    def simulate(self) -> CommandOutput:
        """Sample stationary factor paths on the configured grid."""
        config = self.config
        model = self._config_manager.model
        grid = config.sampler.grid(model, config.market.t)
        paths = sample_paths(
            model, grid, config.sampler.n_paths, config.seed, SamplerMethod(config.sampler.method)
        )
        columns: Dict[str, Sequence[float]] = {"time": grid}
        if len(paths) == 1:
            columns["z"] = paths[0].z
        else:
            for path in paths:
                columns[f"z_{path.index}"] = path.z
        document = {
            "time": grid,
            "paths": [path.z for path in paths],
            "method": paths[0].method.value,
        }
        return CommandOutput(columns=columns, document=document)

    def price(self) -> CommandOutput:
        """Corrected prices over the lattice, conditional on a sampled factor history."""
        state = self._history_state()
        rows = []
        for spec in self._config_manager.contracts:
            decomposition = corrected_price(
                state, spec, self._config_manager.vol_function, self._config_manager.model
            )
            row = {
                "strike": spec.strike,
                "maturity": spec.maturity,
                "tau_rel": (spec.maturity - state.t) / decomposition.tau_bar,
                "moneyness": spec.strike / state.x,
            }
            row.update(decomposition.to_dict())
            rows.append(row)
        return CommandOutput(
            columns=_rows_to_columns(rows, PRICE_COLUMNS),
            document={"prices": rows},
        )

    def ivsurface(self) -> CommandOutput:
        """Mean implied volatility with its one-sd band over the lattice."""
        config = self.config
        if config.figure:
            return self._figure(IV_FIGURES)
        F = self._config_manager.vol_function  # pylint: disable=invalid-name
        model = self._config_manager.model
        tau_bar = moments(F, model).tau_bar
        tau_rel = [(maturity - config.market.t) / tau_bar for maturity in config.lattice.maturities]
        moneyness = [strike / config.market.spot for strike in config.lattice.strikes]
        surface = mean_iv_surface(F, model, config.market.rho, tau_rel, moneyness)
        points = iv_lattice(
            self._history_state(), F, model, config.lattice.strikes, config.lattice.maturities
        )
        return CommandOutput(columns=surface, document={"surface": surface, "points": points})

    def ttfield(self) -> CommandOutput:
        """Realizations of the normalized t-T field along the configured transect."""
        config = self.config
        if config.figure:
            return self._figure(FIELD_FIGURES)
        H = config.model.hurst  # pylint: disable=invalid-name
        size = config.field.grid_size
        t = config.market.t
        tau = self._longest_tau()
        mode = FieldMode(config.field.mode)
        axis_name = "tau"
        if mode == FieldMode.FIXED_MATURITY:
            taus = np.linspace(tau / size, tau, size)
            grid = fixed_maturity_grid(taus, H, maturity=t + tau)
        elif mode == FieldMode.FIXED_TTM:
            grid = fixed_ttm_grid(t + np.linspace(0.0, TTM_SPAN * tau, size), H, tau=tau)
            axis_name = None
        elif mode == FieldMode.FIXED_TIME:
            grid = fixed_time_grid(np.linspace(tau / size, tau, size), H, current=t)
        else:
            times = np.linspace(t, t + tau, size, endpoint=False)
            grid = free_grid(times, config.lattice.maturities, H)
            axis_name = None
        columns = realization_columns(grid, config.field.realizations, config.seed, axis_name)
        return CommandOutput(columns=columns, document=columns)

    def validate(self) -> CommandOutput:
        """Convergence study of the first lattice contract, optionally with the moment study."""
        config = self.config
        if len(set(config.mc.eps_ladder)) < MIN_LADDER:
            raise ConfigValidationError(
                "mc.eps_ladder", f"needs at least {MIN_LADDER} distinct values"
            )
        F = self._config_manager.vol_function  # pylint: disable=invalid-name
        model = self._config_manager.model
        spec = self._config_manager.contracts[0]
        report = convergence_study(config.market.to_state(), spec, F, model, config.mc)
        moment_report = None
        if config.moments:
            moment_report = moment_study(F, model, spec.maturity - config.market.t, config.mc)
        rows = [row.to_dict() for row in report.rows]
        summary = {
            "verdict": report.verdict.value,
            "slope": None if report.fit is None else report.fit.slope,
            "uncorrected_slope": (
                None if report.uncorrected_fit is None else report.uncorrected_fit.slope
            ),
            "message": report.message,
        }
        return CommandOutput(
            columns=_rows_to_columns(rows, LADDER_COLUMNS),
            document={"convergence": report, "moments": moment_report},
            summary=summary,
        )

    def figures(self) -> CommandOutput:
        """Data series of a figure preset."""
        return self._figure(tuple(FigureManager(self.config).presets))

    def _figure(self, allowed: Sequence[int]) -> CommandOutput:
        figure = self.config.figure
        if figure not in allowed:
            raise ConfigValidationError(
                "figure", f"{self.config.command} presets are {list(allowed)}, got {figure}"
            )
        columns = FigureManager(self.config).columns(figure)
        return CommandOutput(columns=columns, document=columns)
