"""Named scenes: a clean baseline and five challenge mixes."""
from __future__ import annotations

import re

from ..io.detections import NoiseProfile
from .config import HuddleEpisode, OccluderConfig, SceneConfig

CHALLENGE_NOISE = dict(center_jitter_sigma=2.0, size_jitter_sigma=0.0, fp_rate=0.05, fn_rate=0.05)


def _huddles(starts, members_list, centers, length=120):
    return tuple(HuddleEpisode(s, s + length, m, c) for s, m, c in zip(starts, members_list, centers))


PRESETS = {
    "clean": (
        "still lighting, rigid agents, no occluder",
        dict(),
        dict(),
    ),
    "S1'": (
        "deformation, light fluctuation and a long-stay occluder",
        dict(deformation=0.12, gain_steps=((150, 0.75), (330, 1.1), (480, 0.85)), flicker=0.08,
             occluder=OccluderConfig(entry=60, length=70.0, speed=2.5, stay=150, n_waypoints=4,
                                     opacity=0.85)),
        dict(CHALLENGE_NOISE, occlusion_fn_boost=3.0),
    ),
    "S2'": (
        "severe inter-agent occlusion with temporary invisibility",
        dict(huddles=_huddles([80, 320], [(0, 1, 2), (3, 4, 5)], [(300.0, 260.0), (640.0, 280.0)]),
             huddle_pull=0.03),
        dict(CHALLENGE_NOISE, occlusion_fn_boost=8.0),
    ),
    "S3'": (
        "light fluctuation with mild crowding",
        dict(gain_steps=((100, 0.6), (250, 1.15), (400, 0.8)), flicker=0.1, flicker_period=40.0,
             huddles=_huddles([200], [(6, 7)], [(480.0, 270.0)], length=100)),
        dict(CHALLENGE_NOISE, occlusion_fn_boost=3.0),
    ),
    "S4'": (
        "insect occluder crossing deforming agents",
        dict(deformation=0.15,
             occluder=OccluderConfig(entry=30, length=80.0, speed=4.0, stay=30, n_waypoints=10,
                                     opacity=0.9)),
        dict(CHALLENGE_NOISE, occlusion_fn_boost=3.0),
    ),
    "S5'": (
        "night mode: grayscale frames with shadow gradients",
        dict(mode="night", shadow=0.25, gain_steps=((300, 0.85),),
             huddles=_huddles([250], [(1, 2)], [(420.0, 300.0)], length=90)),
        dict(CHALLENGE_NOISE, occlusion_fn_boost=3.0),
    ),
}

CHALLENGES = ("S1'", "S2'", "S3'", "S4'", "S5'")


def canonical_name(name: str) -> str:
    """Accept ``S3'``, ``S3``, ``s3p`` and ``clean`` spellings."""
    raw = name.strip()
    if raw.lower() == "clean":
        return "clean"
    m = re.fullmatch(r"[sS]([1-5])(?:'|p|P|prime)?", raw)
    if not m:
        raise KeyError(f"unknown scenario {name!r}; choose from clean, S1'..S5'")
    return f"S{m.group(1)}'"


def scenario(name: str, seed: int = 0, n_frames: int | None = None, **overrides):
    """(SceneConfig, NoiseProfile) for a named preset."""
    key = canonical_name(name)
    _, scene_kw, noise_kw = PRESETS[key]
    kw = dict(scene_kw, seed=seed, **overrides)
    if n_frames is not None:
        kw["n_frames"] = n_frames
    return SceneConfig(**kw), NoiseProfile(seed=seed, **noise_kw)


def describe(name: str) -> str:
    return PRESETS[canonical_name(name)][0]
