"""Frame-loop orchestration, configuration and output rendering."""
from .config import ConfigError, PipelineConfig, dump_config, load_config, parse_overrides
from .overlay import render_overlays, trajectory_plot
from .run import FrameTiming, RunLog, TeleportInjection, Tracker, run_sequence
from .scenario import SimulatedSequence, named_sequence, simulate_sequence

__all__ = [
    "ConfigError", "FrameTiming", "PipelineConfig", "RunLog", "SimulatedSequence", "TeleportInjection",
    "Tracker", "named_sequence", "simulate_sequence",
    "dump_config", "load_config", "parse_overrides", "render_overlays", "run_sequence",
    "trajectory_plot",
]
