"""Typing helper."""

from typing import TYPE_CHECKING, Callable, List, Sequence, Union

import numpy as np

# pylint: disable=invalid-name
if TYPE_CHECKING:
    from fracvol.models.fou_path import FouPath
else:
    FouPath = "FouPath"

ArrayLike = Union[float, Sequence[float], np.ndarray]
RealFunction = Callable[[np.ndarray], np.ndarray]
FouPaths = List[FouPath]
