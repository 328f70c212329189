"""Models for market states, option contracts and price decompositions."""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

from mashumaro import DataClassDictMixin

from fracvol.helpers.errors import DomainError
from fracvol.models.fou_path import FouPath


class PayoffKind(Enum):
    """Enum for the payoff of a European contract."""

    CALL = "european-call"
    PUT = "european-put"
    TABLE = "table"


@dataclass
class OptionSpec(DataClassDictMixin):
    """A European contract; table payoffs are piecewise linear through (x, h) points."""

    strike: float
    maturity: float
    payoff: PayoffKind = PayoffKind.CALL
    points: List[List[float]] = field(default_factory=list)

    def __post_init__(self):
        """Validate the contract."""
        if self.payoff == PayoffKind.TABLE:
            if len(self.points) < 2:
                raise DomainError("table payoff needs at least two (x, h) points")
            knots = [point[0] for point in self.points]
            if any(b <= a for a, b in zip(knots, knots[1:])) or knots[0] <= 0:
                raise DomainError("table payoff knots must be positive and increasing")
        elif not self.strike > 0:
            raise DomainError(f"strike must be positive, got {self.strike}")

    def replication(self) -> Tuple[float, float, List[Tuple[float, float]]]:
        """Return (bond, underlying, [(strike, weight)]) with h(y) = b + a y + sum w (y - k)+."""
        if self.payoff == PayoffKind.CALL:
            return 0.0, 0.0, [(self.strike, 1.0)]
        if self.payoff == PayoffKind.PUT:
            return self.strike, -1.0, [(self.strike, 1.0)]
        knots = [float(point[0]) for point in self.points]
        values = [float(point[1]) for point in self.points]
        slopes = [
            (v1 - v0) / (k1 - k0) for k0, k1, v0, v1 in zip(knots, knots[1:], values, values[1:])
        ]
        calls = [
            (knot, right - left)
            for knot, left, right in zip(knots[1:-1], slopes, slopes[1:])
            if right != left
        ]
        return values[0] - slopes[0] * knots[0], slopes[0], calls

    def payoff_value(self, x: float) -> float:
        """Return h(x)."""
        bond, underlying, calls = self.replication()
        return bond + underlying * x + sum(weight * max(x - k, 0.0) for k, weight in calls)


@dataclass
class MarketState:
    """Current time, spot, leverage and the factor history handle."""

    t: float
    x: float
    rho: float = 0.0
    path: Optional[FouPath] = None

    def __post_init__(self):
        """Validate the state."""
        if not self.x > 0 or not math.isfinite(self.x):
            raise DomainError(f"spot must be positive, got {self.x}")
        if not -1.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must lie in [-1, 1], got {self.rho}")


@dataclass
class SkewConstants(DataClassDictMixin):
    """Deterministic constants of the first-order correction."""

    a_F: float  # pylint: disable=invalid-name
    d_bar: float
    theta_bar: float
    sigma_phi: float
    tau_bar: float
    H: float  # pylint: disable=invalid-name

    def d_of_tau(self, tau: float) -> float:
        """Return D_t = d_bar tau^(H+1/2)."""
        return self.d_bar * tau ** (self.H + 0.5)

    def theta_of_tau(self, tau: float) -> float:
        """Return theta_t = theta_bar tau^(H-1/2)."""
        return self.theta_bar * tau ** (self.H - 0.5)


@dataclass
class PriceDecomposition(DataClassDictMixin):
    """Leading price, random and skew corrections and their sum."""

    q0: float
    phi: float
    random_term: float
    skew_term: float
    total: float
    tau_bar: float
    a_F: float  # pylint: disable=invalid-name
    d1: Optional[float] = None
    normalized: Optional[float] = None  # (total - q0)/K for single-strike payoffs
