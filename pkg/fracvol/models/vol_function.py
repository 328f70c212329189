"""Models for volatility function specifications and their derived moments."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List

from mashumaro import DataClassDictMixin


class VolKind(Enum):
    """Enum for the family of a volatility function."""

    ERF = "erf"
    SINC_SQUARED = "sinc-squared"
    LOGISTIC = "logistic"
    TABLE = "table"


@dataclass
class VolSpec(DataClassDictMixin):
    """JSON specification of a volatility function: {"kind": ..., "params": {...}}."""

    kind: VolKind = VolKind.ERF
    params: Dict[str, Any] = field(default_factory=dict)


@dataclass
class VolMoments(DataClassDictMixin):
    """Gaussian averages of the volatility function."""

    sigma_bar_sq: float  # <F^2>
    sigma_tilde: float  # <F>
    ff_prime: float  # <F F'>
    f_prime: float  # <F'>
    f_prime_sq: float  # <F'^2>
    nodes: int = 0

    @property
    def sigma_bar(self) -> float:
        """Return the effective volatility sqrt(<F^2>)."""
        return math.sqrt(self.sigma_bar_sq)

    @property
    def tau_bar(self) -> float:
        """Return the characteristic diffusion time 2/sigma_bar^2."""
        return 2.0 / self.sigma_bar_sq

    @property
    def variance(self) -> float:
        """Return Var(F) = <F^2> - <F>^2."""
        return self.sigma_bar_sq - self.sigma_tilde ** 2


@dataclass
class HermiteExpansion(DataClassDictMixin):
    """Hermite coefficients C_k = E[He_k(X) F~(X)] and their normalized form."""

    coefficients: List[float]  # C_k
    normalized: List[float]  # C_k / sqrt(k!)
    second_moment: float  # E[F~(X)^2]

    @property
    def k_max(self) -> int:
        """Return the highest order."""
        return len(self.coefficients) - 1

    @property
    def parseval_sum(self) -> float:
        """Return sum_k C_k^2 / k!."""
        return float(sum(value * value for value in self.normalized))
