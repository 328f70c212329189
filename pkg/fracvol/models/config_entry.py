"""Model and helpers for Config entries."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, List, Tuple

from mashumaro import DataClassDictMixin

from fracvol.helpers.errors import ConfigValidationError


class ConfigEntryType(Enum):
    """Enum for the type of a config entry."""

    BOOL = "boolean"
    STRING = "string"
    INT = "integer"
    FLOAT = "float"
    FLOAT_LIST = "float_list"
    LIST = "list"
    DICT = "dict"


@dataclass
class ConfigEntry(DataClassDictMixin):
    """Model for a Config Entry, keyed by its dotted path in the run configuration."""

    entry_key: str
    entry_type: ConfigEntryType
    default_value: Any = None
    values: List[Any] = field(default_factory=list)  # select from list of values
    range: Tuple[Any, ...] = ()  # (low, high), None for an unbounded side
    open_range: bool = False  # bounds are excluded
    description: str = ""  # extended description of the setting.

    def validate(self, value: Any) -> Any:
        """Check a value against type, allowed values and range; return it unchanged."""
        if self.entry_type == ConfigEntryType.FLOAT_LIST:
            if not isinstance(value, list):
                raise ConfigValidationError(self.entry_key, "must be a list of numbers")
            for item in value:
                self._check_number(item)
            return value
        if self.entry_type in (ConfigEntryType.FLOAT, ConfigEntryType.INT):
            self._check_number(value)
            return value
        expected = {
            ConfigEntryType.BOOL: bool,
            ConfigEntryType.STRING: str,
            ConfigEntryType.LIST: list,
            ConfigEntryType.DICT: dict,
        }[self.entry_type]
        if not isinstance(value, expected):
            raise ConfigValidationError(
                self.entry_key, f"must be of type {self.entry_type.value}, got {value!r}"
            )
        if self.values and value not in self.values:
            raise ConfigValidationError(
                self.entry_key, f"must be one of {self.values}, got {value!r}"
            )
        return value

    def _check_number(self, value: Any) -> None:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigValidationError(self.entry_key, f"must be a number, got {value!r}")
        if self.entry_type == ConfigEntryType.INT and not isinstance(value, int):
            raise ConfigValidationError(self.entry_key, f"must be an integer, got {value!r}")
        if not math.isfinite(value):
            raise ConfigValidationError(self.entry_key, f"must be finite, got {value!r}")
        if self.values and value not in self.values:
            raise ConfigValidationError(
                self.entry_key, f"must be one of {self.values}, got {value!r}"
            )
        if not self.range:
            return
        low, high = self.range
        if self.open_range:
            inside = (low is None or value > low) and (high is None or value < high)
            brackets = "()"
        else:
            inside = (low is None or value >= low) and (high is None or value <= high)
            brackets = "[]"
        if not inside:
            low_text = "-inf" if low is None else low
            high_text = "inf" if high is None else high
            raise ConfigValidationError(
                self.entry_key,
                f"must lie in {brackets[0]}{low_text}, {high_text}{brackets[1]}, got {value!r}",
            )
