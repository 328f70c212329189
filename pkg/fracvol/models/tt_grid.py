"""Models for covariance grids of the normalized t-T correction field."""
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np


class FieldMode(Enum):
    """Enum for the transect of the (t, T) plane a grid lies on."""

    FIXED_MATURITY = "fixed-maturity"
    FIXED_TTM = "fixed-ttm"
    FIXED_TIME = "fixed-time"
    FREE = "free"


@dataclass(frozen=True)
class TTCovarianceGrid:
    """(t, T) coordinates with t < T and their unit-diagonal correlation matrix."""

    coords: Tuple[Tuple[float, float], ...]
    cov: np.ndarray
    H: float  # pylint: disable=invalid-name
    mode: FieldMode = FieldMode.FREE
    axis: Tuple[float, ...] = ()  # tau, t or tau along the transect, empty for free grids

    @property
    def size(self) -> int:
        """Return the number of grid points."""
        return len(self.coords)

    @property
    def times(self) -> List[float]:
        """Return the current times t."""
        return [coord[0] for coord in self.coords]

    @property
    def maturities(self) -> List[float]:
        """Return the maturities T."""
        return [coord[1] for coord in self.coords]
