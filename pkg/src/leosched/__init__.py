"""Desk-scale LEO downlink scheduling simulator and allocator.

Geometry, link budget, interference, and queueing for a multibeam LEO
downlink, with three allocation strategies: a generative channel-beam
graph driven by a learned or rule-based policy, full frequency reuse, and
per-beam single-channel selection.
"""

from .config import ScenarioConfig, config_from_dict, config_from_file, config_hash
from .simharness import Metrics, run_episode, run_sweep

__version__ = "0.1.0"

__all__ = [
    "Metrics",
    "ScenarioConfig",
    "config_from_dict",
    "config_from_file",
    "config_hash",
    "run_episode",
    "run_sweep",
    "__version__",
]
