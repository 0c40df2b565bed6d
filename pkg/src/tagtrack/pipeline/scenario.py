"""Simulated sequences: scene states, ground truth and corrupted detections together."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from ..io.detections import DetectionSet, NoiseProfile, synthetic_detections
from ..metrics.trajectories import TrajectorySet
from ..sim import SceneConfig, emit_ground_truth, iter_states, render_frame, scenario


@dataclass
class SimulatedSequence:
    scene: SceneConfig
    noise: NoiseProfile
    states: list
    ground_truth: TrajectorySet
    occlusion: dict
    detections: list[DetectionSet]

    @property
    def initial_boxes(self):
        return [(tid, seq[0][1]) for tid, seq in sorted(self.ground_truth.tracks.items())]

    def frames(self):
        """Rendered lazily, one frame at a time."""
        for st in self.states:
            yield render_frame(st, self.scene)

    def __len__(self):
        return len(self.states)


def simulate_sequence(scene: SceneConfig, noise: NoiseProfile) -> SimulatedSequence:
    states = list(iter_states(scene))
    gt, flags = emit_ground_truth(states)
    per_frame = [{k + 1: a.box() for k, a in enumerate(st.agents)} for st in states]
    occ = [{k + 1: a.occluded for k, a in enumerate(st.agents)} for st in states]
    dets = list(synthetic_detections(per_frame, noise, (scene.width, scene.height), occ))
    return SimulatedSequence(scene, noise, states, gt, flags, dets)


def named_sequence(name: str, seed: int = 0, n_frames: int | None = None,
                   scene_overrides: dict | None = None, noise_overrides: dict | None = None
                   ) -> SimulatedSequence:
    scene, noise = scenario(name, seed=seed, n_frames=n_frames)
    if scene_overrides:
        scene = dataclasses.replace(scene, **scene_overrides)
    if noise_overrides:
        noise = dataclasses.replace(noise, **noise_overrides)
    return simulate_sequence(scene, noise)
