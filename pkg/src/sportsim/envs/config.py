"""Per-sport configuration: arena constants, curricula, weights, limits.

Defaults encode the standard arena dimensions (soccer field 32 x 20 m with
4 x 2 m goals, table tennis table 2.74 x 1.525 x 0.76 m, fencing piste
14 x 2 m, the 10-hurdle 110 m layout, the free-throw distance, ...) and are
overridable from YAML documents; every episode log stamps the config hash.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

import yaml

from ..errors import ConfigError

SPORTS = (
    "high_jump", "long_jump", "hurdling", "golf", "javelin",
    "tennis", "table_tennis", "fencing", "boxing",
    "penalty_kick", "soccer_match", "free_throw", "basketball_match",
)


@dataclass(frozen=True)
class CurriculumConfig:
    """Per-episode task-difficulty sampling."""

    mode: str = "off"                    # off | ladder | uniform
    levels: tuple[float, ...] = ()
    low: float = 0.0
    high: float = 0.0
    fixed_level: float | None = None     # pins the level (evaluation)

    def __post_init__(self):
        if self.mode not in ("off", "ladder", "uniform"):
            raise ConfigError(f"unknown curriculum mode {self.mode!r}")
        if self.mode == "ladder":
            if not self.levels or any(b <= a for a, b in zip(self.levels, self.levels[1:])):
                raise ConfigError("ladder levels must be strictly increasing")
        if self.mode == "uniform" and self.low > self.high:
            raise ConfigError("uniform curriculum needs low <= high")

    def sample(self, rng) -> float:
        if self.fixed_level is not None:
            return float(self.fixed_level)
        if self.mode == "ladder":
            return float(self.levels[rng.integers(len(self.levels))])
        if self.mode == "uniform":
            return float(rng.uniform(self.low, self.high))
        return 0.0


@dataclass(frozen=True)
class SportConfig:
    """One sport's full environment configuration."""

    sport: str
    skeleton: str = "smpl"
    n_agents: int = 1
    time_limit: float = 30.0            # s
    curriculum: CurriculumConfig = field(default_factory=CurriculumConfig)
    weights: dict = field(default_factory=dict)
    consts: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sport not in SPORTS:
            raise ConfigError(f"unknown sport {self.sport!r}")
        if self.n_agents < 1:
            raise ConfigError("n_agents must be >= 1")
        if self.time_limit <= 0:
            raise ConfigError("time_limit must be positive")
        for k, v in self.consts.items():
            if any(k.endswith(suffix) for suffix in _POSITIVE_SUFFIXES) and v <= 0:
                raise ConfigError(f"constant {k}={v} must be positive")

    @property
    def max_steps(self) -> int:
        return int(round(self.time_limit * 30.0))

    def const(self, key: str) -> float:
        try:
            return self.consts[key]
        except KeyError as exc:
            raise ConfigError(f"{self.sport}: missing constant {key!r}") from exc

    def to_dict(self) -> dict:
        return {
            "sport": self.sport, "skeleton": self.skeleton,
            "n_agents": self.n_agents, "time_limit": self.time_limit,
            "curriculum": {
                "mode": self.curriculum.mode,
                "levels": list(self.curriculum.levels),
                "low": self.curriculum.low, "high": self.curriculum.high,
                "fixed_level": self.curriculum.fixed_level,
            },
            "weights": dict(sorted(self.weights.items())),
            "consts": dict(sorted(self.consts.items())),
        }

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_POSITIVE_SUFFIXES = ("_length", "_width", "_height", "_radius", "_mass",
                      "_spacing", "_distance", "_diameter", "_count", "_gap",
                      "_timeout", "ball_from_goal", "agent_from_goal")


def hurdle_positions(first: float = 13.72, spacing: float = 9.14,
                     count: int = 10) -> list[float]:
    """The ten hurdle x-positions: first + spacing * k."""
    return [first + spacing * k for k in range(count)]


def _default(sport: str) -> SportConfig:
    if sport == "high_jump":
        return SportConfig(
            sport=sport, time_limit=30.0,
            curriculum=CurriculumConfig(mode="ladder", levels=(0.5, 1.0, 1.5, 2.0)),
            consts={"bar_x": 20.0, "bar_y": 6.0, "bar_half_width": 2.0,
                    "goal_x": 22.0, "goal_y": 6.0, "goal_z": 1.0,
                    "area_x_min": -5.0, "area_x_max": 28.0,
                    "area_y_min": -5.0, "area_y_max": 12.0})
    if sport == "long_jump":
        return SportConfig(
            sport=sport, time_limit=30.0,
            consts={"runway_length": 20.0, "line_x": 20.0,
                    "goal_x": 30.0, "goal_y": 0.0, "goal_z": 1.0,
                    "track_half_width": 2.0, "area_x_max": 45.0})
    if sport == "hurdling":
        return SportConfig(
            sport=sport, time_limit=30.0,
            curriculum=CurriculumConfig(mode="uniform", low=0.0, high=1.167),
            consts={"first_hurdle_x": 13.72, "hurdle_spacing": 9.14,
                    "hurdle_count": 10, "hurdle_height": 1.067,
                    "finish_x": 110.0, "track_half_width": 2.0})
    if sport == "golf":
        return SportConfig(
            sport=sport, time_limit=30.0,
            curriculum=CurriculumConfig(mode="uniform", low=0.0, high=20.0),
            consts={"ball_spawn_x": 0.5, "ball_radius": 0.021,
                    "ball_mass": 0.046, "restitution": 0.5, "friction": 0.4,
                    "terrain_amplitude": 0.5, "terrain_wavelength": 8.0,
                    "contact_timeout": 2.0, "too_close": 0.3,
                    "heightmap_size": 32, "heightmap_extent": 16.0,
                    "club_length": 1.14, "club_head_size_x": 0.05,
                    "club_head_size_y": 0.025, "club_head_size_z": 0.02})
    if sport == "javelin":
        return SportConfig(
            sport=sport, skeleton="smplx", time_limit=30.0,
            consts={"javelin_length": 2.7, "javelin_radius": 0.015,
                    "javelin_mass": 0.8, "default_pitch_deg": 30.0,
                    "detached_dist": 1.0, "not_released_dist": 0.3,
                    "pose_deviation": 2.0, "stage1_end": 0.6, "stage2_end": 1.2})
    if sport == "tennis":
        return SportConfig(
            sport=sport, time_limit=60.0,
            consts={"court_length": 23.77, "court_width": 8.23,
                    "net_height": 1.0, "ball_radius": 0.032,
                    "ball_mass": 0.057, "restitution": 0.75, "friction": 0.3,
                    "racket_radius": 0.15, "racket_offset": 0.35,
                    "launch_speed_low": 12.0, "launch_speed_high": 22.0,
                    "launch_height": 1.0})
    if sport == "table_tennis":
        return SportConfig(
            sport=sport, time_limit=60.0,
            consts={"table_length": 2.74, "table_width": 1.525,
                    "table_height": 0.76, "net_height": 0.1525,
                    "ball_radius": 0.02, "ball_mass": 0.0027,
                    "restitution": 0.9, "friction": 0.1,
                    "paddle_radius": 0.08, "paddle_offset": 0.12,
                    "launch_speed_low": 4.0, "launch_speed_high": 8.0,
                    "launch_height": 1.1, "agent_x": -2.0})
    if sport == "fencing":
        return SportConfig(
            sport=sport, n_agents=2, time_limit=60.0,
            consts={"piste_length": 14.0, "piste_width": 2.0,
                    "sword_tip_offset": 0.9, "point_distance": 0.1,
                    "point_force": 50.0, "spawn_gap": 4.0})
    if sport == "boxing":
        return SportConfig(
            sport=sport, n_agents=2, time_limit=60.0,
            consts={"ring_length": 5.0, "ring_width": 5.0,
                    "hand_radius": 0.08, "point_distance": 0.1,
                    "point_force": 50.0, "spawn_gap": 3.0})
    if sport == "penalty_kick":
        return SportConfig(
            sport=sport, time_limit=40.0,
            consts={"field_length": 32.0, "field_width": 20.0,
                    "goal_width": 4.0, "goal_height": 2.0,
                    "ball_diameter": 0.115, "ball_mass": 0.45,
                    "restitution": 0.6, "friction": 0.4,
                    "ball_from_goal": 12.0, "agent_from_goal": 13.0,
                    "no_dribble_penalty": 0.5})
    if sport == "soccer_match":
        return SportConfig(
            sport=sport, n_agents=2, time_limit=120.0,
            weights={"p2b": 0.4, "b2g": 0.1, "bv2g": 0.1, "point": 100.0},
            consts={"field_length": 32.0, "field_width": 20.0,
                    "goal_width": 4.0, "goal_height": 2.0,
                    "ball_diameter": 0.115, "ball_mass": 0.45,
                    "restitution": 0.6, "friction": 0.4, "spawn_gap": 6.0})
    if sport == "free_throw":
        return SportConfig(
            sport=sport, skeleton="smplx", time_limit=40.0,
            consts={"court_length": 29.0, "court_width": 15.0,
                    "hoop_height": 3.0, "hoop_radius": 0.225,
                    "throw_distance": 4.5, "ball_radius": 0.12,
                    "ball_mass": 0.6, "restitution": 0.8, "friction": 0.3})
    if sport == "basketball_match":
        return SportConfig(
            sport=sport, skeleton="smplx", n_agents=2, time_limit=120.0,
            weights={"p2b": 0.4, "b2g": 0.1, "bv2g": 0.1, "point": 100.0},
            consts={"court_length": 29.0, "court_width": 15.0,
                    "hoop_height": 3.0, "hoop_radius": 0.225,
                    "ball_radius": 0.12, "ball_mass": 0.6,
                    "restitution": 0.8, "friction": 0.3, "spawn_gap": 6.0})
    raise ConfigError(f"unknown sport {sport!r}")


def default_config(sport: str) -> SportConfig:
    cfg = _default(sport)
    if sport == "hurdling":
        xs = hurdle_positions(cfg.const("first_hurdle_x"), cfg.const("hurdle_spacing"),
                              int(cfg.const("hurdle_count")))
        if len(xs) != 10 or any(x >= cfg.const("finish_x") for x in xs):
            raise ConfigError("hurdle layout must place exactly 10 hurdles before the finish")
    return cfg


def load_config(sport: str, overrides_path=None, **overrides) -> SportConfig:
    """Default config with optional YAML and keyword overrides applied."""
    cfg = default_config(sport)
    doc = {}
    if overrides_path is not None:
        with open(overrides_path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh) or {}
        if not isinstance(doc, dict):
            raise ConfigError(f"override file {overrides_path} must be a mapping")
    doc.update(overrides)
    fields = {}
    for key in ("skeleton", "n_agents", "time_limit"):
        if key in doc:
            fields[key] = doc.pop(key)
    if "curriculum" in doc:
        c = doc.pop("curriculum")
        base = cfg.curriculum
        fields["curriculum"] = CurriculumConfig(
            mode=c.get("mode", base.mode),
            levels=tuple(c.get("levels", base.levels)),
            low=c.get("low", base.low), high=c.get("high", base.high),
            fixed_level=c.get("fixed_level", base.fixed_level))
    if "weights" in doc:
        fields["weights"] = {**cfg.weights, **doc.pop("weights")}
    if "consts" in doc:
        fields["consts"] = {**cfg.consts, **doc.pop("consts")}
    if doc:
        raise ConfigError(f"unknown config keys: {sorted(doc)}")
    return replace(cfg, **fields)
