"""Model for the complete configuration of a fracvol run."""
import dataclasses
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np
from mashumaro import DataClassDictMixin

from fracvol.constants import FIELD_GRID_SIZE, FIGURE_HURST, STEPS_PER_EPS
from fracvol.models.hurst import HurstModel
from fracvol.models.monte_carlo import MCConfig
from fracvol.models.option import MarketState, OptionSpec, PayoffKind


@dataclass
class ModelSection(DataClassDictMixin):
    """Hurst exponent and mean-reversion time."""

    hurst: float = FIGURE_HURST
    epsilon: float = 0.1

    def to_model(self) -> HurstModel:
        """Return the validated factor model."""
        return HurstModel(H=self.hurst, eps=self.epsilon)


@dataclass
class VolSection(DataClassDictMixin):
    """Volatility function spec: {"kind": ..., "params": {...}}."""

    kind: str = "erf"
    params: Dict[str, Any] = field(default_factory=dict)


@dataclass
class MarketSection(DataClassDictMixin):
    """Spot, leverage and current time."""

    spot: float = 100.0
    rho: float = 0.0
    t: float = 0.0

    def to_state(self, path=None) -> MarketState:
        """Return the market state, optionally with a factor history."""
        return MarketState(t=self.t, x=self.spot, rho=self.rho, path=path)


@dataclass
class LatticeSection(DataClassDictMixin):
    """Strikes and maturities of the contracts to price."""

    strikes: List[float] = field(default_factory=lambda: [90.0, 100.0, 110.0])
    maturities: List[float] = field(default_factory=lambda: [0.25, 0.5, 1.0])
    payoff: str = PayoffKind.CALL.value
    points: List[List[float]] = field(default_factory=list)  # table payoffs only

    def contracts(self) -> List[OptionSpec]:
        """Return the contracts in maturity-major order."""
        payoff = PayoffKind(self.payoff)
        if payoff == PayoffKind.TABLE:
            return [
                OptionSpec(strike=1.0, maturity=maturity, payoff=payoff, points=self.points)
                for maturity in self.maturities
            ]
        return [
            OptionSpec(strike=strike, maturity=maturity, payoff=payoff)
            for maturity in self.maturities
            for strike in self.strikes
        ]


@dataclass
class SamplerSection(DataClassDictMixin):
    """Grid and method of the path sampler; dt = 0 selects eps/20."""

    grid_size: int = 512
    dt: float = 0.0
    n_paths: int = 1
    method: str = "auto"

    def grid(self, model: HurstModel, start: float = 0.0) -> np.ndarray:
        """Return the uniform sampling grid."""
        step = self.dt or model.eps / STEPS_PER_EPS
        return start + step * np.arange(self.grid_size)


@dataclass
class FieldSection(DataClassDictMixin):
    """Transect, resolution and number of realizations of the t-T field."""

    mode: str = "fixed-maturity"
    grid_size: int = FIELD_GRID_SIZE
    realizations: int = 1


@dataclass
class OutputSection(DataClassDictMixin):
    """Artifact path and format; an empty format picks the command default."""

    path: str = ""
    format: str = ""


@dataclass
class RunConfig(DataClassDictMixin):
    """Everything a run needs; embedded in every emitted artifact."""

    model: ModelSection = dataclasses.field(default_factory=ModelSection)
    vol: VolSection = dataclasses.field(default_factory=VolSection)
    market: MarketSection = dataclasses.field(default_factory=MarketSection)
    lattice: LatticeSection = dataclasses.field(default_factory=LatticeSection)
    mc: MCConfig = dataclasses.field(default_factory=MCConfig)
    sampler: SamplerSection = dataclasses.field(default_factory=SamplerSection)
    field: FieldSection = dataclasses.field(default_factory=FieldSection)
    output: OutputSection = dataclasses.field(default_factory=OutputSection)
    seed: int = 0
    command: str = ""
    figure: int = 0
    moments: bool = False  # validate also runs the moment study
