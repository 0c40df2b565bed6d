"""Per-target discriminative correlation filter with factored channels."""
from .config import TrackerConfig
from .gmm import GmmSampleSpace, update_sample_space
from .model import (DegenerateSampleError, FeatureShapeError, FilterModel, compute_response,
                    init_track_model, joint_optimize_projection, localize, train_filter,
                    update_model)
from .serialize import FORMAT_VERSION, load_model, save_model

__all__ = [
    "DegenerateSampleError", "FORMAT_VERSION", "FeatureShapeError", "FilterModel", "GmmSampleSpace",
    "TrackerConfig", "compute_response", "init_track_model", "joint_optimize_projection",
    "load_model", "localize", "save_model", "train_filter", "update_model", "update_sample_space",
]
