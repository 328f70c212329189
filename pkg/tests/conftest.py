"""Shared fixtures for the fracvol tests."""
import pytest

from fracvol.models.hurst import HurstModel
from fracvol.models.vol_function import VolKind, VolSpec
from fracvol.vol_model import VolFunction


@pytest.fixture(scope="session")
def model():
    """Return the reference model H=0.6, eps=0.1."""
    return HurstModel(H=0.6, eps=0.1)


@pytest.fixture(scope="session")
def erf_vol():
    """Return the error-function volatility at H=0.6."""
    return VolFunction(VolSpec(kind=VolKind.ERF), 0.6)


@pytest.fixture(scope="session")
def logistic_vol():
    """Return the default logistic volatility at H=0.6."""
    return VolFunction(VolSpec(kind=VolKind.LOGISTIC), 0.6)


@pytest.fixture(scope="session")
def scaled_vol():
    """Return a logistic volatility with desk-like levels (10% to 40%)."""
    return VolFunction(
        VolSpec(
            kind=VolKind.LOGISTIC,
            params={"sigma_lo": 0.1, "sigma_hi": 0.4, "kappa": 1.5},
        ),
        0.6,
    )
