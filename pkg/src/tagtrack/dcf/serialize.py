"""Checkpoint a FilterModel to a single ``.npz`` archive.

Arrays are stored as-is; the two configs and the scalar metadata go into a
JSON string under ``meta``. ``FORMAT_VERSION`` is bumped on any layout change.
"""
from __future__ import annotations

import dataclasses
import json

import numpy as np

from ..features import FeatureConfig
from .config import TrackerConfig
from .gmm import GmmSampleSpace
from .model import FilterModel

FORMAT_VERSION = 1


def save_model(model: FilterModel, path) -> None:
    space = model.sample_space
    meta = {
        "version": FORMAT_VERSION,
        "label_sigma": list(model.label_sigma),
        "sample_size": list(model.sample_size),
        "ref_size": list(model.ref_size),
        "tracker": dataclasses.asdict(model.config),
        "features": dataclasses.asdict(model.feature_config),
        "gmm": {"max_components": space.max_components, "learning_rate": space.learning_rate,
                "drop_threshold": space.drop_threshold},
    }
    means = space.stacked() if len(space) else np.zeros((0,) + model.grid + (model.n_basis,))
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta)), filters=model.filters,
                 projection=model.projection, reg_weights=model.reg_weights, label=model.label,
                 gmm_means=means, gmm_weights=space.weights, gmm_dist=space._dist)


def load_model(path) -> FilterModel:
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(str(z["meta"]))
        if meta.get("version") != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported model format version {meta.get('version')}")
        arrays = {k: z[k] for k in z.files if k != "meta"}
    space = GmmSampleSpace(**meta["gmm"])
    space.means = list(arrays["gmm_means"])
    space.weights = arrays["gmm_weights"]
    space._dist = arrays["gmm_dist"]
    return FilterModel(
        filters=arrays["filters"],
        projection=arrays["projection"],
        reg_weights=arrays["reg_weights"],
        label=arrays["label"],
        label_sigma=tuple(meta["label_sigma"]),
        sample_space=space,
        sample_size=tuple(meta["sample_size"]),
        ref_size=tuple(meta["ref_size"]),
        config=TrackerConfig(**meta["tracker"]),
        feature_config=FeatureConfig(**meta["features"]),
    )
