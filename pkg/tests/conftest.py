import numpy as np
import pytest

from vlcmux.channel import FrontEndModel
from vlcmux.geometry import OrientationModel, RoomConfig
from vlcmux.link import NoiseModel
from vlcmux.strategies import SystemParams


def make_params(**overrides) -> SystemParams:
    """Standard parameter set: 5x5x3 m room, 80 W, 50 MHz, K=256."""
    room = overrides.pop("room", RoomConfig(5.0, 5.0, 3.0, 3.0, 0.75))
    frontend = overrides.pop("frontend", FrontEndModel(35e6, 106e6, 0.2, 1e-8, 256, 30))
    noise = overrides.pop("noise", NoiseModel(50.0, 300.0, frontend.signalling_bandwidth))
    defaults = dict(
        room=room,
        frontend=frontend,
        noise=noise,
        total_power=80.0,
        clipping_level=3.2,
        gap_db=6.06,
        pd_area=1e-4,
        quantum_efficiency=0.8,
    )
    defaults.update(overrides)
    return SystemParams(**defaults)


@pytest.fixture
def params() -> SystemParams:
    return make_params()


@pytest.fixture
def upward() -> OrientationModel:
    return OrientationModel.upward()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260811)
