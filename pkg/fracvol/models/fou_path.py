"""Models for sampled fOU paths and conditional laws of the factor."""
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from mashumaro import DataClassDictMixin

from fracvol.models.hurst import HurstModel


class SamplerMethod(Enum):
    """
    Enum for the synthesis method of a path.

    CHOLESKY draws the exact stationary law on the grid and MOVING_AVERAGE leaves out
    the unresolved component. CIRCULANT is approximate: exact fGn is filtered with
    cell-averaged exponential weights (an O(dt/eps) error) from an independent
    N(0, sigma_ou^2) start placed CIRCULANT_BURN_IN_EPS before the grid, whose error
    is damped by exp(-CIRCULANT_BURN_IN_EPS).
    """

    AUTO = "auto"
    CHOLESKY = "cholesky"
    MOVING_AVERAGE = "moving-average"
    CIRCULANT = "circulant"


@dataclass(frozen=True)
class NoiseGrid:
    """Cells carrying the driving Brownian increments of a path."""

    edges: np.ndarray  # strictly increasing, last edge is the final path time
    history_span: float  # uniform window before the first path time
    far_span: float  # total span before the first path time

    @property
    def widths(self) -> np.ndarray:
        """Return the cell widths."""
        return np.diff(self.edges)

    @property
    def size(self) -> int:
        """Return the number of cells."""
        return self.edges.size - 1


@dataclass(frozen=True)
class FouPath:
    """A stationary eps-scaled fOU trajectory and the noise that drove it."""

    model: HurstModel
    grid: np.ndarray
    z: np.ndarray
    seed: int
    index: int
    method: SamplerMethod
    noise: Optional[NoiseGrid] = None
    dW: Optional[np.ndarray] = None  # pylint: disable=invalid-name
    # part of z not spanned by the stored increments and its variance per grid point
    unresolved: Optional[np.ndarray] = None
    unresolved_var: Optional[np.ndarray] = None

    @property
    def history_span(self) -> float:
        """Return the retained uniform pre-history in calendar units."""
        return 0.0 if self.noise is None else self.noise.history_span

    @property
    def conditionable(self) -> bool:
        """Return True when driving increments are stored."""
        return self.dW is not None


@dataclass
class ConditionalLaw(DataClassDictMixin):
    """Gaussian law of Z_s given the history up to t."""

    mean: float
    std: float
