"""Agent motion, occluder flight and ground truth for the synthetic pen."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from ..geometry import BoundingBox
from ..metrics.trajectories import TrajectorySet
from .config import SceneConfig


@dataclass(frozen=True)
class AgentSpec:
    """Per-agent constants fixed by the seed."""

    a0: float             # nominal semi-axes
    b0: float
    phase: float
    texture_seed: int
    tint: tuple[float, float, float]


@dataclass
class AgentState:
    cx: float
    cy: float
    vx: float
    vy: float
    theta: float
    a: float
    b: float
    occluded: bool = False

    @property
    def heading(self) -> float:
        return math.atan2(self.vy, self.vx)

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)

    def half_extent(self) -> tuple[float, float]:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return (math.sqrt((self.a * c) ** 2 + (self.b * s) ** 2),
                math.sqrt((self.a * s) ** 2 + (self.b * c) ** 2))

    def box(self) -> BoundingBox:
        hx, hy = self.half_extent()
        return BoundingBox(self.cx - hx, self.cy - hy, 2 * hx, 2 * hy)


@dataclass
class SceneState:
    frame: int
    agents: list[AgentState]
    occluder: tuple[float, float, float] | None = None   # cx, cy, heading

    def copy(self) -> "SceneState":
        return SceneState(self.frame, [replace(a) for a in self.agents], self.occluder)


@lru_cache(maxsize=32)
def agent_specs(cfg: SceneConfig) -> tuple[AgentSpec, ...]:
    rng = np.random.default_rng([cfg.seed, 1])
    out = []
    for k in range(cfg.n_agents):
        s = 1.0 + cfg.size_jitter * rng.uniform(-1, 1)
        tint = tuple(float(v) for v in np.clip(
            np.array([0.86, 0.68, 0.62]) + rng.uniform(-0.08, 0.08, 3), 0, 1))
        out.append(AgentSpec(cfg.agent_length / 2 * s, cfg.agent_width / 2 * s,
                             float(rng.uniform(0, 2 * math.pi)), int(rng.integers(2**31)), tint))
    return tuple(out)


def _axes(spec: AgentSpec, cfg: SceneConfig, frame: int) -> tuple[float, float]:
    if cfg.deformation == 0:
        return spec.a0, spec.b0
    s = math.sin(spec.phase + 2 * math.pi * frame / cfg.deformation_period)
    return spec.a0 * (1 + cfg.deformation * s), spec.b0 * (1 - 0.5 * cfg.deformation * s)


def initial_state(cfg: SceneConfig) -> SceneState:
    """Non-overlapping random placement, still agents."""
    rng = np.random.default_rng([cfg.seed, 2])
    specs = agent_specs(cfg)
    agents: list[AgentState] = []
    reach = max(s.a0 for s in specs) * (1 + cfg.deformation) + cfg.margin
    for k, spec in enumerate(specs):
        a, b = _axes(spec, cfg, 0)
        for attempt in range(10000):
            cx = rng.uniform(reach, cfg.width - reach)
            cy = rng.uniform(reach, cfg.height - reach)
            theta = rng.uniform(-math.pi / 2, math.pi / 2)
            gap = 1.0 if attempt < 5000 else 0.6
            if all(math.hypot(cx - o.cx, cy - o.cy) > gap * (a + o.a) for o in agents):
                break
        agents.append(AgentState(cx, cy, 0.0, 0.0, theta, a, b))
    state = SceneState(0, agents, _occluder_pose(cfg, 0))
    _set_occlusion(state, cfg)
    return state


def _wrap_half(angle: float) -> float:
    # orientation is symmetric under a half turn
    return (angle + math.pi / 2) % math.pi - math.pi / 2


def _huddle_targets(cfg: SceneConfig, frame: int) -> dict[int, tuple[float, float]]:
    targets = {}
    for ep in cfg.huddles:
        if ep.start <= frame < ep.end:
            n = len(ep.members)
            for j, k in enumerate(ep.members):
                ang = 2 * math.pi * j / n
                targets[k] = (ep.center[0] + ep.spread * math.cos(ang),
                              ep.center[1] + ep.spread * math.sin(ang))
    return targets


def step_scene(state: SceneState, cfg: SceneConfig) -> SceneState:
    """Advance every agent and the occluder by one frame."""
    t = state.frame + 1
    rng = np.random.default_rng([cfg.seed, 3, t])
    specs = agent_specs(cfg)
    new = state.copy()
    new.frame = t
    agents = new.agents
    noise = rng.standard_normal((len(agents), 2)) * cfg.step_sigma
    huddle = _huddle_targets(cfg, t)

    for k, ag in enumerate(agents):
        ag.vx = cfg.persistence * ag.vx + noise[k, 0]
        ag.vy = cfg.persistence * ag.vy + noise[k, 1]
        if k in huddle:
            tx, ty = huddle[k]
            ag.vx += cfg.huddle_pull * (tx - ag.cx) - 0.1 * ag.vx
            ag.vy += cfg.huddle_pull * (ty - ag.cy) - 0.1 * ag.vy

    for i in range(len(agents)):
        for j in range(i + 1, len(agents)):
            if i in huddle and j in huddle:
                continue
            p, q = agents[i], agents[j]
            dx, dy = q.cx - p.cx, q.cy - p.cy
            d = math.hypot(dx, dy)
            dmin = 0.5 * (p.a + p.b + q.a + q.b)
            if d >= dmin or cfg.repulsion == 0:
                continue
            if d < 1e-9:
                dx, dy, d = 1.0, 0.0, 1.0
            push = cfg.repulsion * (dmin - d) / dmin
            p.vx -= push * dx / d
            p.vy -= push * dy / d
            q.vx += push * dx / d
            q.vy += push * dy / d

    for k, ag in enumerate(agents):
        sp = ag.speed
        if sp > cfg.max_speed:
            ag.vx *= cfg.max_speed / sp
            ag.vy *= cfg.max_speed / sp
            sp = cfg.max_speed
        if sp > 0.2:
            diff = _wrap_half(math.atan2(ag.vy, ag.vx) - ag.theta)
            # theta stays continuous so the body texture never flips
            ag.theta += max(-cfg.turn_rate, min(cfg.turn_rate, diff))
        ag.a, ag.b = _axes(specs[k], cfg, t)
        ag.cx += ag.vx
        ag.cy += ag.vy
        _reflect(ag, cfg)

    new.occluder = _occluder_pose(cfg, t)
    _set_occlusion(new, cfg)
    return new


def _reflect(ag: AgentState, cfg: SceneConfig) -> None:
    hx, hy = ag.half_extent()
    lo_x, hi_x = cfg.margin + hx, cfg.width - cfg.margin - hx
    lo_y, hi_y = cfg.margin + hy, cfg.height - cfg.margin - hy
    if ag.cx < lo_x:
        ag.cx, ag.vx = 2 * lo_x - ag.cx, abs(ag.vx)
    elif ag.cx > hi_x:
        ag.cx, ag.vx = 2 * hi_x - ag.cx, -abs(ag.vx)
    if ag.cy < lo_y:
        ag.cy, ag.vy = 2 * lo_y - ag.cy, abs(ag.vy)
    elif ag.cy > hi_y:
        ag.cy, ag.vy = 2 * hi_y - ag.cy, -abs(ag.vy)
    ag.cx = min(max(ag.cx, lo_x), hi_x)
    ag.cy = min(max(ag.cy, lo_y), hi_y)


@lru_cache(maxsize=32)
def _occluder_path(cfg: SceneConfig) -> tuple[np.ndarray, np.ndarray]:
    """Waypoints and the frame (relative to entry) at which each leg starts."""
    oc = cfg.occluder
    rng = np.random.default_rng([cfg.seed, 4])
    m = oc.length / 2
    pts = np.column_stack([rng.uniform(m, cfg.width - m, oc.n_waypoints + 1),
                           rng.uniform(m, cfg.height - m, oc.n_waypoints + 1)])
    times = [0.0]
    for k in range(oc.n_waypoints):
        times.append(times[-1] + oc.stay + np.linalg.norm(pts[k + 1] - pts[k]) / oc.speed)
    return pts, np.array(times)


def _occluder_pose(cfg: SceneConfig, frame: int):
    oc = cfg.occluder
    if oc is None or not oc.entry <= frame < oc.exit:
        return None
    pts, times = _occluder_path(cfg)
    # loop over the route
    tau = (frame - oc.entry) % times[-1] if times[-1] > 0 else 0.0
    k = int(np.searchsorted(times, tau, side="right") - 1)
    k = min(k, len(pts) - 2)
    p, q = pts[k], pts[k + 1]
    heading = math.atan2(q[1] - p[1], q[0] - p[0])
    moving = tau - times[k] - oc.stay
    if moving <= 0:
        return float(p[0]), float(p[1]), heading
    leg = times[k + 1] - times[k] - oc.stay
    u = min(1.0, moving / leg) if leg > 0 else 1.0
    c = p + u * (q - p)
    return float(c[0]), float(c[1]), heading


def ellipse_mask(xs, ys, cx, cy, a, b, theta):
    dx, dy = xs - cx, ys - cy
    c, s = math.cos(theta), math.sin(theta)
    u = (dx * c + dy * s) / a
    v = (-dx * s + dy * c) / b
    return u * u + v * v <= 1.0


def occluder_parts(pose, length: float):
    """(cx, cy, a, b, theta) ellipses making up the insect: body, head, two wings."""
    cx, cy, h = pose
    c, s = math.cos(h), math.sin(h)
    L = length
    parts = [(cx, cy, 0.32 * L, 0.12 * L, h),
             (cx + 0.36 * L * c, cy + 0.36 * L * s, 0.09 * L, 0.08 * L, h)]
    for side in (-1, 1):
        wx = cx - 0.05 * L * c - side * 0.2 * L * s
        wy = cy - 0.05 * L * s + side * 0.2 * L * c
        parts.append((wx, wy, 0.3 * L, 0.13 * L, h + side * 1.1))
    return parts


def occluder_mask(xs, ys, pose, length):
    m = np.zeros(np.broadcast(xs, ys).shape, dtype=bool)
    for p in occluder_parts(pose, length):
        m |= ellipse_mask(xs, ys, *p)
    return m


def agent_pixels(ag: AgentState, width: int, height: int):
    """Pixel-center grid over the agent's box, clipped to the frame."""
    box = ag.box()
    x0, x1 = max(0, int(math.floor(box.x))), min(width, int(math.ceil(box.x2)))
    y0, y1 = max(0, int(math.floor(box.y))), min(height, int(math.ceil(box.y2)))
    xs = np.arange(x0, x1) + 0.5
    ys = np.arange(y0, y1) + 0.5
    return xs[None, :], ys[:, None], (x0, y0)


def coverage(state: SceneState, cfg: SceneConfig, k: int) -> float:
    """Fraction of agent ``k``'s pixels hidden by agents above it or the occluder."""
    ag = state.agents[k]
    xs, ys, _ = agent_pixels(ag, cfg.width, cfg.height)
    own = ellipse_mask(xs, ys, ag.cx, ag.cy, ag.a, ag.b, ag.theta)
    n = int(own.sum())
    if n == 0:
        return 0.0
    hidden = np.zeros_like(own)
    for other in state.agents[k + 1:]:
        hidden |= ellipse_mask(xs, ys, other.cx, other.cy, other.a, other.b, other.theta)
    if state.occluder is not None:
        hidden |= occluder_mask(xs, ys, state.occluder, cfg.occluder.length)
    return float((hidden & own).sum()) / n


def _set_occlusion(state: SceneState, cfg: SceneConfig) -> None:
    for k, ag in enumerate(state.agents):
        ag.occluded = coverage(state, cfg, k) > 0.5


def iter_states(cfg: SceneConfig, n_frames: int | None = None):
    state = initial_state(cfg)
    n = cfg.n_frames if n_frames is None else n_frames
    for _ in range(n):
        yield state
        state = step_scene(state, cfg)


def emit_ground_truth(states, first_id: int = 1):
    """Tight boxes of each ellipse, ids ``first_id..``, plus occlusion flags."""
    ts = TrajectorySet()
    flags: dict[tuple[int, int], bool] = {}
    for st in states:
        for k, ag in enumerate(st.agents):
            tid = first_id + k
            ts.add(tid, st.frame, ag.box())
            flags[(st.frame, tid)] = ag.occluded
    return ts, flags
