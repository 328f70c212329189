"""Model for a point of the implied volatility expansion."""
from dataclasses import dataclass

from mashumaro import DataClassDictMixin


@dataclass
class IVPoint(DataClassDictMixin):
    """Implied volatility I = sigma_bar (1 + dI) split into its random and skew parts."""

    tau_rel: float
    log_moneyness: float
    iv_total: float
    delta_iv_random: float
    delta_iv_skew: float
    sigma_bar: float = 0.0
    phi: float = 0.0
    rms_forward_vol: float = 0.0  # (sigma_bar^2 + 2 phi / tau)^(1/2)
    first_order_forward_vol: float = 0.0  # sigma_bar + phi / (sigma_bar tau)
    valid: bool = True

    @property
    def delta_iv(self) -> float:
        """Return the relative correction dI."""
        return self.delta_iv_random + self.delta_iv_skew
