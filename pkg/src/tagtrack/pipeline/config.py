"""Run configuration: one INI section per component plus ``--set`` overrides."""
from __future__ import annotations

import configparser
import dataclasses
import io
import os
from dataclasses import dataclass, field

from ..association.cost import AssociationConfig
from ..dcf.config import TrackerConfig
from ..features.config import FeatureConfig
from ..io.detections import NoiseProfile


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    features: FeatureConfig = field(default_factory=FeatureConfig)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    association: AssociationConfig = field(default_factory=AssociationConfig)
    workers: int = 1
    frames_dir: str | None = None
    detections_path: str | None = None
    initial_boxes_path: str | None = None
    out_dir: str | None = None
    scene: dict = field(default_factory=dict)   # SceneConfig overrides
    noise: dict = field(default_factory=dict)   # NoiseProfile overrides

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def check_paths(self) -> None:
        for name in ("frames_dir", "detections_path", "initial_boxes_path"):
            path = getattr(self, name)
            if path is not None and not os.path.exists(path):
                raise ConfigError(f"{name}: {path} does not exist")


_SECTIONS = {"features": FeatureConfig, "tracker": TrackerConfig,
             "association": AssociationConfig}
_PIPELINE_KEYS = ("workers", "frames_dir", "detections_path", "initial_boxes_path", "out_dir")


def _coerce(value: str, like):
    text = value.strip()
    if isinstance(like, bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"not a boolean: {value!r}")
    if isinstance(like, int):
        return int(text)
    if isinstance(like, float):
        return float(text)
    if isinstance(like, tuple):
        return tuple(float(v) for v in text.replace(",", " ").split())
    if like is None:
        for kind in (int, float):
            try:
                return kind(text)
            except ValueError:
                pass
    return text


def _scene_field_types() -> dict:
    from ..sim.config import SceneConfig
    return {f.name: f.default for f in dataclasses.fields(SceneConfig)}


def _noise_field_types() -> dict:
    return {f.name: f.default for f in dataclasses.fields(NoiseProfile)}


def _apply(values: dict[str, dict[str, str]], base: PipelineConfig) -> PipelineConfig:
    kw = {}
    for section, klass in _SECTIONS.items():
        current = getattr(base, section)
        items = values.get(section, {})
        known = {f.name for f in dataclasses.fields(klass)}
        changes = {}
        for key, raw in items.items():
            if key not in known:
                raise ConfigError(f"unknown key {section}.{key}")
            try:
                changes[key] = _coerce(raw, getattr(current, key))
            except ValueError as exc:
                raise ConfigError(f"{section}.{key}: {exc}") from None
        try:
            kw[section] = dataclasses.replace(current, **changes)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {exc}") from None
    pipe = {}
    for key, raw in values.get("pipeline", {}).items():
        if key not in _PIPELINE_KEYS:
            raise ConfigError(f"unknown key pipeline.{key}")
        pipe[key] = _coerce(raw, getattr(base, key)) if key == "workers" else raw
    for section, types in (("scene", _scene_field_types()), ("noise", _noise_field_types())):
        merged = dict(getattr(base, section))
        for key, raw in values.get(section, {}).items():
            if key not in types:
                raise ConfigError(f"unknown key {section}.{key}")
            if not isinstance(types[key], (int, float, str)):
                raise ConfigError(f"{section}.{key} cannot be set from text")
            try:
                merged[key] = _coerce(raw, types[key])
            except ValueError as exc:
                raise ConfigError(f"{section}.{key}: {exc}") from None
        kw[section] = merged
    unknown = set(values) - set(_SECTIONS) - {"pipeline", "scene", "noise"}
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    try:
        return dataclasses.replace(base, **kw, **pipe)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_overrides(items) -> dict[str, dict[str, str]]:
    out: dict[str, dict[str, str]] = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot or not name:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        out.setdefault(section.lower(), {})[name.strip()] = value
    return out


def load_config(path=None, overrides=None, base: PipelineConfig | None = None) -> PipelineConfig:
    values: dict[str, dict[str, str]] = {}
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file {path} does not exist")
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        parser.optionxform = str
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        for section in parser.sections():
            values[section.lower()] = dict(parser[section])
    for section, items in parse_overrides(overrides).items():
        values.setdefault(section, {}).update(items)
    return _apply(values, base or PipelineConfig())


def dump_config(cfg: PipelineConfig) -> str:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    for section in _SECTIONS:
        sub = getattr(cfg, section)
        parser[section] = {
            f.name: (" ".join(repr(v) for v in getattr(sub, f.name))
                     if isinstance(getattr(sub, f.name), tuple) else str(getattr(sub, f.name)))
            for f in dataclasses.fields(sub)}
    parser["pipeline"] = {"workers": str(cfg.workers)}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
