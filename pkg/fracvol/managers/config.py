"""All classes and helpers for the run Configuration."""

import copy
import logging
import os
from typing import Any, Dict, List, Optional

from fracvol.constants import (
    COMMANDS,
    CONF_ANTITHETIC,
    CONF_BATCH_SIZE,
    CONF_COMMAND,
    CONF_DT,
    CONF_EPS_LADDER,
    CONF_EPSILON,
    CONF_FIGURE,
    CONF_FORMAT,
    CONF_GRID_SIZE,
    CONF_HURST,
    CONF_KEY_FIELD,
    CONF_KEY_LATTICE,
    CONF_KEY_MARKET,
    CONF_KEY_MC,
    CONF_KEY_MODEL,
    CONF_KEY_OUTPUT,
    CONF_KEY_SAMPLER,
    CONF_KEY_VOL,
    CONF_KIND,
    CONF_MATURITIES,
    CONF_METHOD,
    CONF_MODE,
    CONF_MOMENTS,
    CONF_N_PATHS,
    CONF_PARAMS,
    CONF_PATH,
    CONF_REALIZATIONS,
    CONF_RHO,
    CONF_SCHEME,
    CONF_SEED,
    CONF_SPOT,
    CONF_STEPS_PER_EPS,
    CONF_STRIKES,
    CONF_TIME,
    FIELD_GRID_SIZE,
    FIGURE_HURST,
    FIGURE_NUMBERS,
    MC_BATCH_SIZE,
    MC_MIN_PATHS,
    OUTPUT_FORMATS,
    STEPS_PER_EPS,
    __version__,
)
from fracvol.helpers.errors import ConfigValidationError, DomainError
from fracvol.helpers.output import parse_metadata
from fracvol.helpers.util import merge_dict, try_load_json_file
from fracvol.models.config_entry import ConfigEntry, ConfigEntryType
from fracvol.models.fou_path import SamplerMethod
from fracvol.models.hurst import HurstModel
from fracvol.models.monte_carlo import MCScheme
from fracvol.models.option import OptionSpec, PayoffKind
from fracvol.models.run_config import RunConfig
from fracvol.models.tt_grid import FieldMode
from fracvol.models.vol_function import VolKind
from fracvol.vol_model import VolFunction

LOGGER = logging.getLogger("config_manager")

CONF_KEY_CONFIG = "config"
CONF_POINTS = "points"
CONF_PAYOFF = "payoff"
ERF_ALIAS = "paper-appendix"


def _key(*parts: str) -> str:
    return ".".join(parts)


CONFIG_ENTRIES = [
    ConfigEntry(
        entry_key=_key(CONF_KEY_MODEL, CONF_HURST),
        entry_type=ConfigEntryType.FLOAT,
        default_value=FIGURE_HURST,
        range=(0.5, 1.0),
        open_range=True,
        description="Hurst exponent of the volatility factor",
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_MODEL, CONF_EPSILON),
        entry_type=ConfigEntryType.FLOAT,
        default_value=0.1,
        range=(0.0, None),
        open_range=True,
        description="Mean-reversion time in years",
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_VOL, CONF_KIND),
        entry_type=ConfigEntryType.STRING,
        default_value=VolKind.ERF.value,
        values=[item.value for item in VolKind] + [ERF_ALIAS],
        description="Family of the volatility function",
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_VOL, CONF_PARAMS),
        entry_type=ConfigEntryType.DICT,
        default_value={},
        description="Kind-specific parameters of the volatility function",
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_MARKET, CONF_SPOT),
        entry_type=ConfigEntryType.FLOAT,
        default_value=100.0,
        range=(0.0, None),
        open_range=True,
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_MARKET, CONF_RHO),
        entry_type=ConfigEntryType.FLOAT,
        default_value=0.0,
        range=(-1.0, 1.0),
        description="Leverage correlation",
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_MARKET, CONF_TIME),
        entry_type=ConfigEntryType.FLOAT,
        default_value=0.0,
        range=(0.0, None),
        description="Current time",
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_LATTICE, CONF_STRIKES),
        entry_type=ConfigEntryType.FLOAT_LIST,
        default_value=[90.0, 100.0, 110.0],
        range=(0.0, None),
        open_range=True,
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_LATTICE, CONF_MATURITIES),
        entry_type=ConfigEntryType.FLOAT_LIST,
        default_value=[0.25, 0.5, 1.0],
        range=(0.0, None),
        open_range=True,
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_LATTICE, CONF_PAYOFF),
        entry_type=ConfigEntryType.STRING,
        default_value=PayoffKind.CALL.value,
        values=[item.value for item in PayoffKind],
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_LATTICE, CONF_POINTS),
        entry_type=ConfigEntryType.LIST,
        default_value=[],
        description="(x, h) knots of a table payoff",
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_MC, CONF_N_PATHS),
        entry_type=ConfigEntryType.INT,
        default_value=100000,
        range=(MC_MIN_PATHS, None),
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_MC, CONF_STEPS_PER_EPS),
        entry_type=ConfigEntryType.INT,
        default_value=STEPS_PER_EPS,
        range=(1, None),
        description="Time steps per mean-reversion time; below 10 is warned about",
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_MC, CONF_SCHEME),
        entry_type=ConfigEntryType.STRING,
        default_value=MCScheme.LOG_EULER.value,
        values=[item.value for item in MCScheme],
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_MC, CONF_ANTITHETIC),
        entry_type=ConfigEntryType.BOOL,
        default_value=True,
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_MC, CONF_SEED),
        entry_type=ConfigEntryType.INT,
        default_value=None,
        range=(0, None),
        description="Defaults to the run seed",
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_MC, CONF_EPS_LADDER),
        entry_type=ConfigEntryType.FLOAT_LIST,
        default_value=[],
        range=(0.0, None),
        open_range=True,
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_MC, CONF_BATCH_SIZE),
        entry_type=ConfigEntryType.INT,
        default_value=MC_BATCH_SIZE,
        range=(2, None),
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_SAMPLER, CONF_GRID_SIZE),
        entry_type=ConfigEntryType.INT,
        default_value=512,
        range=(2, None),
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_SAMPLER, CONF_DT),
        entry_type=ConfigEntryType.FLOAT,
        default_value=0.0,
        range=(0.0, None),
        description="Grid spacing, 0 selects eps/20",
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_SAMPLER, CONF_N_PATHS),
        entry_type=ConfigEntryType.INT,
        default_value=1,
        range=(1, None),
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_SAMPLER, CONF_METHOD),
        entry_type=ConfigEntryType.STRING,
        default_value=SamplerMethod.AUTO.value,
        values=[item.value for item in SamplerMethod],
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_FIELD, CONF_MODE),
        entry_type=ConfigEntryType.STRING,
        default_value=FieldMode.FIXED_MATURITY.value,
        values=[item.value for item in FieldMode],
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_FIELD, CONF_GRID_SIZE),
        entry_type=ConfigEntryType.INT,
        default_value=FIELD_GRID_SIZE,
        range=(2, None),
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_FIELD, CONF_REALIZATIONS),
        entry_type=ConfigEntryType.INT,
        default_value=1,
        range=(1, None),
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_OUTPUT, CONF_PATH),
        entry_type=ConfigEntryType.STRING,
        default_value="",
        description="Artifact path, empty writes to stdout",
    ),
    ConfigEntry(
        entry_key=_key(CONF_KEY_OUTPUT, CONF_FORMAT),
        entry_type=ConfigEntryType.STRING,
        default_value="",
        values=[""] + list(OUTPUT_FORMATS),
        description="Artifact format, empty picks the command default",
    ),
    ConfigEntry(
        entry_key=CONF_SEED,
        entry_type=ConfigEntryType.INT,
        default_value=0,
        range=(0, None),
    ),
    ConfigEntry(
        entry_key=CONF_COMMAND,
        entry_type=ConfigEntryType.STRING,
        default_value="",
        values=[""] + list(COMMANDS),
    ),
    ConfigEntry(
        entry_key=CONF_FIGURE,
        entry_type=ConfigEntryType.INT,
        default_value=0,
        values=[0] + list(FIGURE_NUMBERS),
        description="Figure preset, 0 for none",
    ),
    ConfigEntry(
        entry_key=CONF_MOMENTS,
        entry_type=ConfigEntryType.BOOL,
        default_value=False,
        description="Run the moment study next to the convergence study",
    ),
]
ENTRIES_BY_KEY = {entry.entry_key: entry for entry in CONFIG_ENTRIES}


def _get(data: dict, dotted: str) -> Any:
    for part in dotted.split("."):
        data = data[part]
    return data


def _set(data: dict, dotted: str, value: Any) -> None:
    parts = dotted.split(".")
    for part in parts[:-1]:
        data = data.setdefault(part, {})
    data[parts[-1]] = value


def nest_flags(flags: Dict[str, Any]) -> dict:
    """Turn {"model.hurst": 0.7, ...} into a nested dict, dropping unset (None) flags."""
    result: dict = {}
    for key, value in flags.items():
        if value is not None:
            _set(result, key, value)
    return result


def default_config() -> dict:
    """Return the nested default configuration built from the entry table."""
    result: dict = {}
    for entry in CONFIG_ENTRIES:
        _set(result, entry.entry_key, copy.deepcopy(entry.default_value))
    return result


def check_keys(data: dict, prefix: str = "") -> None:
    """Raise ConfigValidationError for the first unknown dotted key."""
    if not isinstance(data, dict):
        raise ConfigValidationError(prefix or CONF_KEY_CONFIG, "must be a JSON object")
    sections = {key.split(".")[0] for key in ENTRIES_BY_KEY}
    for key, value in data.items():
        dotted = _key(prefix, key) if prefix else key
        if dotted in ENTRIES_BY_KEY:
            continue
        if not prefix and key in sections:
            check_keys(value, dotted)
            continue
        raise ConfigValidationError(dotted, "unknown key")


class ConfigManager:
    """Loads, merges and validates the run configuration."""

    def __init__(self, config_file: Optional[str] = None) -> None:
        """Initialize with an optional JSON config or previously emitted artifact."""
        self._config_file = config_file
        self._config: Optional[RunConfig] = None
        self._model: Optional[HurstModel] = None
        self._vol_function: Optional[VolFunction] = None
        self._contracts: List[OptionSpec] = []

    def load(self, overrides: Optional[dict] = None) -> RunConfig:
        """Merge defaults, file values and overrides; validate before anything runs."""
        overrides = overrides or {}
        stored = self._read_file() if self._config_file else {}
        check_keys(stored)
        check_keys(overrides)
        explicit = merge_dict(stored, overrides)
        merged = merge_dict(default_config(), explicit)
        if _get(merged, _key(CONF_KEY_MC, CONF_SEED)) is None:
            _set(merged, _key(CONF_KEY_MC, CONF_SEED), merged[CONF_SEED])
        for entry in CONFIG_ENTRIES:
            entry.validate(_get(merged, entry.entry_key))
        if merged[CONF_KEY_VOL][CONF_KIND] == ERF_ALIAS:
            merged[CONF_KEY_VOL][CONF_KIND] = VolKind.ERF.value
        config = RunConfig.from_dict(merged)
        self._check_domain(config)
        self._config = config
        LOGGER.debug("loaded configuration for command %r (seed %s)", config.command, config.seed)
        return config

    def _read_file(self) -> dict:
        """Return the config dict of a JSON document or of an artifact's metadata block."""
        if not os.path.isfile(self._config_file):
            raise FileNotFoundError(f"config file not found: {self._config_file}")
        with open(self._config_file, "r") as _file:
            text = _file.read()
        metadata = parse_metadata(text)
        if metadata is not None and isinstance(metadata.get(CONF_KEY_CONFIG), dict):
            LOGGER.info("reusing the configuration embedded in %s", self._config_file)
            return metadata[CONF_KEY_CONFIG]
        data = try_load_json_file(self._config_file)
        if data is None:
            raise ConfigValidationError(
                CONF_KEY_CONFIG, f"{self._config_file} is neither JSON nor a fracvol artifact"
            )
        return data

    def _check_domain(self, config: RunConfig) -> None:
        """Build the domain objects so that their preconditions fail early."""
        if any(maturity < config.market.t for maturity in config.lattice.maturities):
            raise ConfigValidationError(
                _key(CONF_KEY_LATTICE, CONF_MATURITIES),
                f"maturities must not precede the current time {config.market.t}",
            )
        config.mc.validate()
        self._model = config.model.to_model()
        try:
            self._vol_function = VolFunction.from_dict(config.vol.to_dict(), self._model.H)
        except ConfigValidationError:
            raise
        except DomainError as exc:
            raise ConfigValidationError(_key(CONF_KEY_VOL, CONF_PARAMS), str(exc)) from exc
        try:
            self._contracts = config.lattice.contracts()
        except DomainError as exc:
            field = (
                _key(CONF_KEY_LATTICE, CONF_POINTS)
                if config.lattice.payoff == PayoffKind.TABLE.value
                else _key(CONF_KEY_LATTICE, CONF_STRIKES)
            )
            raise ConfigValidationError(field, str(exc)) from exc

    def metadata(self) -> Dict[str, Any]:
        """Return the metadata block embedded in every artifact."""
        config = self.config.to_dict()
        config[CONF_KEY_OUTPUT][CONF_PATH] = ""
        return {
            "fracvol": __version__,
            CONF_COMMAND: self.config.command,
            CONF_SEED: self.config.seed,
            CONF_KEY_CONFIG: config,
        }

    @property
    def config(self) -> RunConfig:
        """Return the validated run configuration."""
        if self._config is None:
            raise RuntimeError("configuration not loaded")
        return self._config

    @property
    def model(self) -> HurstModel:
        """Return the factor model."""
        return self._model

    @property
    def vol_function(self) -> VolFunction:
        """Return the volatility function."""
        return self._vol_function

    @property
    def contracts(self) -> List[OptionSpec]:
        """Return the lattice contracts, maturity-major."""
        return self._contracts
