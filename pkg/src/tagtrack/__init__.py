"""Multi-target tracking that follows a small tag-box on each target with a
correlation filter and ties it to per-frame detections.

Subpackages: ``features``, ``dcf``, ``association``, ``io``, ``metrics``,
``sim`` and ``pipeline``; ``tagtrack.cli`` is the command-line entry point.
"""
from .geometry import BoundingBox, TagBox, iou, overlap_fraction

__version__ = "0.1.0"

__all__ = ["BoundingBox", "TagBox", "iou", "overlap_fraction", "__version__"]
