from __future__ import annotations

from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class OccluderConfig:
    """Dark flying "insect" drawn over everything.

    It visits ``n_waypoints`` random points at ``speed`` px/frame and rests
    ``stay`` frames at each, between ``entry`` and ``exit`` (exclusive).
    """

    entry: int = 0
    exit: int = 10**9
    length: float = 70.0
    speed: float = 3.0
    stay: int = 60
    n_waypoints: int = 8
    opacity: float = 0.9

    def __post_init__(self):
        if self.length <= 0 or self.speed <= 0 or self.stay < 0 or self.n_waypoints < 1:
            raise ValueError("occluder length/speed/waypoints must be positive")
        if not 0.0 <= self.opacity <= 1.0:
            raise ValueError("occluder opacity must lie in [0, 1]")


@dataclass(frozen=True)
class HuddleEpisode:
    """Agents ``members`` gather around ``center`` during [start, end)."""

    start: int
    end: int
    members: tuple[int, ...]
    center: tuple[float, float]
    spread: float = 18.0


@dataclass(frozen=True)
class SceneConfig:
    width: int = 960
    height: int = 540
    n_agents: int = 9
    agent_length: float = 96.0      # nominal major axis (diameter)
    agent_width: float = 52.0
    size_jitter: float = 0.1        # per-agent relative spread of nominal size
    step_sigma: float = 0.25        # velocity noise, px/frame
    persistence: float = 0.95
    max_speed: float = 2.5
    turn_rate: float = 0.02         # rad/frame
    repulsion: float = 0.15
    huddle_pull: float = 0.02
    deformation: float = 0.0        # relative axis-ratio amplitude
    deformation_period: float = 90.0
    occluder: OccluderConfig | None = None
    huddles: tuple[HuddleEpisode, ...] = ()
    gain_steps: tuple[tuple[int, float], ...] = ()
    flicker: float = 0.0            # relative sinusoidal gain amplitude
    flicker_period: float = 50.0
    mode: str = "day"
    mode_switches: tuple[tuple[int, str], ...] = ()
    shadow: float = 0.2             # night-mode additive gradient depth
    margin: float = 4.0
    n_frames: int = 600
    seed: int = 0

    def __post_init__(self):
        if self.n_agents < 1:
            raise ValueError("n_agents must be >= 1")
        if self.width < 16 or self.height < 16:
            raise ValueError("frame too small")
        if self.agent_width <= 0 or self.agent_length < self.agent_width:
            raise ValueError("need 0 < agent_width <= agent_length")
        big = self.agent_length * (1 + self.size_jitter) * (1 + self.deformation) + 2 * self.margin
        if big >= min(self.width, self.height):
            raise ValueError("agents do not fit in the frame")
        if self.step_sigma < 0 or not 0 <= self.persistence < 1:
            raise ValueError("bad motion parameters")
        if not 0 <= self.deformation < 0.5:
            raise ValueError("deformation must lie in [0, 0.5)")
        for m in [self.mode] + [m for _, m in self.mode_switches]:
            if m not in ("day", "night"):
                raise ValueError(f"unknown mode {m!r}")
        for h in self.huddles:
            if any(not 0 <= k < self.n_agents for k in h.members):
                raise ValueError("huddle member out of range")
        if self.n_frames < 1:
            raise ValueError("n_frames must be >= 1")

    def mode_at(self, frame: int) -> str:
        mode = self.mode
        for start, m in sorted(self.mode_switches):
            if frame >= start:
                mode = m
        return mode

    def gain_at(self, frame: int) -> float:
        import math
        g = 1.0
        for start, value in sorted(self.gain_steps):
            if frame >= start:
                g = value
        if self.flicker:
            g *= 1.0 + self.flicker * math.sin(2 * math.pi * frame / self.flicker_period)
        return max(g, 0.0)

    def with_(self, **kw) -> "SceneConfig":
        return replace(self, **kw)
