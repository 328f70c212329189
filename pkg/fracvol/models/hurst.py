"""Model for the fractional Ornstein-Uhlenbeck factor parameters."""

import math
from dataclasses import dataclass

from mashumaro import DataClassDictMixin

from fracvol.helpers.errors import DomainError


def check_hurst(hurst: float) -> float:
    """Validate a Hurst exponent in the open interval (1/2, 1)."""
    hurst = float(hurst)
    if not 0.5 < hurst < 1.0:
        raise DomainError(f"hurst must lie in the open interval (0.5, 1), got {hurst}")
    return hurst


@dataclass(frozen=True)
class HurstModel(DataClassDictMixin):
    """Hurst exponent and mean-reversion time of the volatility factor."""

    H: float  # pylint: disable=invalid-name
    eps: float

    def __post_init__(self):
        """Validate the parameters."""
        check_hurst(self.H)
        if not self.eps > 0 or not math.isfinite(self.eps):
            raise DomainError(f"epsilon must be positive, got {self.eps}")

    @property
    def sigma_H_sq(self) -> float:  # pylint: disable=invalid-name
        """Return the fBm scale constant 1/(Gamma(2H+1) sin(pi H))."""
        return 1.0 / (math.gamma(2.0 * self.H + 1.0) * math.sin(math.pi * self.H))

    @property
    def sigma_ou_sq(self) -> float:
        """Return the stationary variance of the factor, 1/(2 sin(pi H))."""
        return 0.5 * math.gamma(2.0 * self.H + 1.0) * self.sigma_H_sq

    @property
    def sigma_ou(self) -> float:
        """Return the stationary standard deviation of the factor."""
        return math.sqrt(self.sigma_ou_sq)

    @property
    def tail_constant(self) -> float:
        """Return 1/Gamma(2H-1), the prefactor of the correlation tail s^(2H-2)."""
        return 1.0 / math.gamma(2.0 * self.H - 1.0)

    def with_eps(self, eps: float) -> "HurstModel":
        """Return the same exponent at another mean-reversion time."""
        return HurstModel(H=self.H, eps=eps)
