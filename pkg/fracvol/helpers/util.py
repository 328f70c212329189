"""Helper and utility functions."""
import asyncio
import logging
import os
from typing import Any, Dict, Optional

import ujson

from fracvol.constants import ENV_THREADS


def run_background_task(corofn, *args, executor=None):
    """Run non-async task in background."""
    return asyncio.get_event_loop().run_in_executor(executor, corofn, *args)


def try_parse_int(possible_int):
    """Try to parse an int."""
    try:
        return int(possible_int)
    except (TypeError, ValueError):
        return 0


def parse_float_list(value: Any) -> list:
    """Parse a comma separated string (or a list) into a list of floats."""
    if isinstance(value, str):
        return [float(item) for item in value.split(",") if item.strip()]
    return [float(item) for item in value]


def worker_count() -> int:
    """Return the number of workers, capped by the FRACVOL_THREADS env var."""
    count = os.cpu_count() or 1
    cap = try_parse_int(os.environ.get(ENV_THREADS))
    if cap > 0:
        count = min(count, cap)
    return max(count, 1)


def merge_dict(base_dict: dict, new_dict: dict) -> dict:
    """Recursively merge new_dict over base_dict, skipping None values."""
    final_dict = base_dict.copy()
    for key, value in new_dict.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(final_dict.get(key), dict):
            final_dict[key] = merge_dict(final_dict[key], value)
        else:
            final_dict[key] = value
    return final_dict


def try_load_json_file(jsonfile) -> Optional[Dict[str, Any]]:
    """Try to load json from file."""
    try:
        with open(jsonfile, "r") as _file:
            return ujson.loads(_file.read())
    except (FileNotFoundError, ValueError) as exc:
        logging.getLogger().debug(
            "Could not load json from file %s", jsonfile, exc_info=exc
        )
        return None
