"""Deterministic synthetic pen scenes with exact ground truth."""
from .config import HuddleEpisode, OccluderConfig, SceneConfig
from .presets import CHALLENGES, PRESETS, canonical_name, describe, scenario
from .render import render_frame
from .scene import (
    AgentSpec, AgentState, SceneState, coverage, emit_ground_truth, initial_state, iter_states,
    step_scene,
)

__all__ = [
    "AgentSpec", "AgentState", "CHALLENGES", "HuddleEpisode", "OccluderConfig", "PRESETS",
    "SceneConfig", "SceneState", "canonical_name", "coverage", "describe", "emit_ground_truth",
    "initial_state", "iter_states", "render_frame", "scenario", "step_scene",
]
