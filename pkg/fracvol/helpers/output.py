"""Serialization of results into CSV and JSON artifacts."""
import logging
import math
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import aiofiles
import numpy as np
import ujson

from fracvol.constants import CSV_COMMENT, FLOAT_DIGITS

LOGGER = logging.getLogger("output")


def serialize_values(obj):
    """Recursively create serializable values for (custom) data types."""

    def get_val(val):
        if hasattr(val, "to_dict"):
            return get_val(val.to_dict())
        if isinstance(val, np.ndarray):
            return [get_val(x) for x in val.tolist()]
        if isinstance(val, (np.floating, float)):
            val = float(val)
            return val if math.isfinite(val) else None
        if isinstance(val, np.integer):
            return int(val)
        if isinstance(val, np.bool_):
            return bool(val)
        if isinstance(val, Enum):
            return val.value
        if isinstance(val, (list, set, filter, tuple)):
            return [get_val(x) for x in val]
        if isinstance(val, dict):
            return {key: get_val(value) for key, value in val.items()}
        return val

    return get_val(obj)


def json_serializer(obj) -> str:
    """Json serializer to recursively create serializable values for custom data types."""
    return ujson.dumps(serialize_values(obj), sort_keys=True)


def format_float(value: float) -> str:
    """Format a float with 17 significant digits, '.' decimal and no grouping."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{FLOAT_DIGITS}g}"


def csv_text(
    metadata: Dict[str, Any], columns: Sequence[str], rows: Sequence[Sequence[float]]
) -> str:
    """Return CSV text with the metadata block as a leading comment line."""
    lines = [CSV_COMMENT + json_serializer(metadata), ",".join(columns)]
    for row in rows:
        lines.append(",".join(format_float(value) for value in row))
    return "\n".join(lines) + "\n"


def csv_from_columns(
    metadata: Dict[str, Any], columns: Dict[str, Sequence[float]]
) -> str:
    """Return CSV text for equal-length named columns."""
    names = list(columns.keys())
    data = np.column_stack([np.asarray(columns[name], dtype=float) for name in names])
    return csv_text(metadata, names, data.tolist())


def json_text(metadata: Dict[str, Any], result: Any) -> str:
    """Return the JSON document for a result."""
    return json_serializer({"metadata": metadata, "result": result}) + "\n"


def parse_metadata(text: str) -> Optional[Dict[str, Any]]:
    """Return the metadata block embedded in an emitted CSV or JSON artifact."""
    text = text.lstrip()
    if text.startswith(CSV_COMMENT.strip()):
        first_line = text.splitlines()[0]
        return ujson.loads(first_line[len(CSV_COMMENT.strip()) :].strip())
    try:
        document = ujson.loads(text)
    except ValueError:
        return None
    if isinstance(document, dict) and isinstance(document.get("metadata"), dict):
        return document["metadata"]
    return None


def read_csv_columns(text: str) -> Dict[str, List[float]]:
    """Parse an emitted CSV back into named float columns."""
    lines = [line for line in text.splitlines() if line and not line.startswith("#")]
    names = lines[0].split(",")
    columns: Dict[str, List[float]] = {name: [] for name in names}
    for line in lines[1:]:
        for name, value in zip(names, line.split(",")):
            columns[name].append(float(value))
    return columns


async def write_artifact(path: str, text: str) -> None:
    """Write an artifact to disk."""
    async with aiofiles.open(path, "w") as _file:
        await _file.write(text)
    LOGGER.info("wrote %s (%s bytes)", path, len(text))
