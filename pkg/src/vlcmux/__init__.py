"""VLC MIMO-OFDM joint multiplexing simulator and configuration search."""

__version__ = "0.1.0"

from .evaluator import McConfig, RateEstimate, average_rate, evaluate_scene  # noqa: F401
from .geometry import OrientationModel, RoomConfig, UeState
from .strategies import (
    SceneConfig,
    StrategyConfig,
    SystemParams,
    empirical_scwd,
    empirical_sd,
    empirical_wd,
)

__all__ = [
    "McConfig",
    "OrientationModel",
    "RateEstimate",
    "RoomConfig",
    "SceneConfig",
    "StrategyConfig",
    "SystemParams",
    "UeState",
    "average_rate",
    "evaluate_scene",
    "empirical_scwd",
    "empirical_sd",
    "empirical_wd",
    "__version__",
]
