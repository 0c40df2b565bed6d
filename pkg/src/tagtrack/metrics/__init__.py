"""Multi-object tracking metrics and trajectory files."""
from .clear import FrameMatch, MetricsReport, clear_metrics, frame_correspondence, track_level_metrics
from .trajectories import TrajectorySet, load_trajectories, load_trajectories_with_flags, write_trajectories

__all__ = [
    "FrameMatch", "MetricsReport", "TrajectorySet", "clear_metrics", "frame_correspondence",
    "load_trajectories", "load_trajectories_with_flags", "track_level_metrics", "write_trajectories",
]
