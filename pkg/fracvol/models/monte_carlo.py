"""Models for Monte Carlo configuration, estimates and validation reports."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

from mashumaro import DataClassDictMixin

from fracvol.constants import MC_BATCH_SIZE, MC_MIN_PATHS, MC_MIN_STEPS_PER_EPS, STEPS_PER_EPS
from fracvol.helpers.errors import ConfigValidationError
from fracvol.helpers.stats import SlopeFit


class MCScheme(Enum):
    """Enum for the time stepping of the log price."""

    LOG_EULER = "log-euler"


class Verdict(Enum):
    """Enum for the outcome of a convergence study."""

    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "inconclusive"


@dataclass
class MCConfig(DataClassDictMixin):
    """Monte Carlo settings; paths are drawn in fixed batches keyed by (seed, batch)."""

    n_paths: int = 100000
    steps_per_eps: int = STEPS_PER_EPS
    scheme: MCScheme = MCScheme.LOG_EULER
    antithetic: bool = True
    seed: int = 0
    eps_ladder: List[float] = field(default_factory=list)
    batch_size: int = MC_BATCH_SIZE

    def validate(self) -> None:
        """Raise ConfigValidationError on invalid settings."""
        if self.n_paths < MC_MIN_PATHS:
            raise ConfigValidationError(
                "mc.n_paths", f"must be at least {MC_MIN_PATHS}, got {self.n_paths}"
            )
        if self.steps_per_eps < 1:
            raise ConfigValidationError(
                "mc.steps_per_eps", f"must be positive, got {self.steps_per_eps}"
            )
        if self.seed < 0:
            raise ConfigValidationError("mc.seed", f"must be non-negative, got {self.seed}")
        if self.antithetic and self.n_paths % 2:
            raise ConfigValidationError("mc.n_paths", "must be even with antithetic pairs")
        if self.batch_size < 2:
            raise ConfigValidationError("mc.batch_size", "must be at least 2")
        if self.antithetic and self.batch_size % 2:
            raise ConfigValidationError("mc.batch_size", "must be even with antithetic pairs")
        if any(not eps > 0 for eps in self.eps_ladder):
            raise ConfigValidationError("mc.eps_ladder", "values must be positive")

    @property
    def coarse_steps(self) -> bool:
        """Return True when the volatility path is under-resolved."""
        return self.steps_per_eps < MC_MIN_STEPS_PER_EPS


@dataclass
class MCEstimate(DataClassDictMixin):
    """Mean payoff, its standard error and the number of paths used."""

    estimate: float
    stderr: float
    n_paths: int


@dataclass
class LadderRow(DataClassDictMixin):
    """One rung of a convergence study."""

    eps: float
    mc_price: float
    stderr: float
    corrected: float
    uncorrected: float
    residual: float
    uncorrected_residual: float
    phi: float
    resolved: bool  # residual at least two standard errors


@dataclass
class ConvergenceReport(DataClassDictMixin):
    """Convergence table, fitted orders and the verdict."""

    H: float  # pylint: disable=invalid-name
    rows: List[LadderRow]
    fit: Optional[SlopeFit]
    uncorrected_fit: Optional[SlopeFit]
    verdict: Verdict
    coupled: bool
    message: str = ""


@dataclass
class MomentReport(DataClassDictMixin):
    """Ensemble checks of the random correction and of the integrated volatility."""

    H: float  # pylint: disable=invalid-name
    eps: float
    horizon: float
    n_histories: int
    sigma_phi_sq: float
    variance_ratio: float  # eps^(2H-2) Var(phi) / tau^(2H) over sigma_phi^2
    phi_mean: float
    phi_mean_stderr: float
    covariance_ratio: float  # sample over predicted cross-maturity covariance
    second_maturity: float
    fourth_moments: Dict[str, List[float]]
    fourth_moment_fit: Optional[SlopeFit]
    fourth_moment_bound: float  # 4 - 4H
