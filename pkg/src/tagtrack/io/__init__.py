"""Detection streams, initial boxes and trajectory files."""
from .csvutil import CsvFormatError
from .detections import (
    DetectionSet, NoiseProfile, Prefetcher, load_detections, load_initial_boxes,
    synthetic_detections, write_detections, write_initial_boxes,
)

__all__ = [
    "CsvFormatError", "DetectionSet", "NoiseProfile", "Prefetcher", "load_detections",
    "load_initial_boxes", "synthetic_detections", "write_detections", "write_initial_boxes",
]
