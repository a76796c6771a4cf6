"""Monte Carlo link-level simulator for LTE and mmWave vehicle-to-network links."""

__version__ = "0.1.0"

from .config import SimConfig, ConfigError
from .engine import run_drop, run_campaign, sweep

__all__ = ["SimConfig", "ConfigError", "run_drop", "run_campaign", "sweep", "__version__"]
