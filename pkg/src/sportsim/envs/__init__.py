"""Environment registry and the public construction/inspection surface."""
from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..rewards import parse_goal
from .base import (BatchEnv, EpisodeSummary, MatchState, StepResult,
                   TerminationReason, batch_of, evaluate_termination)
from .basketball import BasketballMatchEnv, FreeThrowEnv
from .combat import BoxingEnv, FencingEnv
from .config import (SPORTS, CurriculumConfig, SportConfig, default_config,
                     hurdle_positions, load_config)
from .golf import GolfEnv
from .javelin import JavelinEnv
from .racket import TableTennisEnv, TennisEnv
from .soccer import PenaltyKickEnv, SoccerMatchEnv
from .track import HighJumpEnv, HurdlingEnv, LongJumpEnv

ENV_CLASSES: dict[str, type[BatchEnv]] = {
    "high_jump": HighJumpEnv,
    "long_jump": LongJumpEnv,
    "hurdling": HurdlingEnv,
    "golf": GolfEnv,
    "javelin": JavelinEnv,
    "tennis": TennisEnv,
    "table_tennis": TableTennisEnv,
    "fencing": FencingEnv,
    "boxing": BoxingEnv,
    "penalty_kick": PenaltyKickEnv,
    "soccer_match": SoccerMatchEnv,
    "free_throw": FreeThrowEnv,
    "basketball_match": BasketballMatchEnv,
}


def make_env(sport: str, num_envs: int = 1, seed: int = 0,
             config: SportConfig | None = None, first_index: int = 0,
             auto_reset: bool = True, **config_overrides) -> BatchEnv:
    """Construct a batched environment for one sport."""
    try:
        cls = ENV_CLASSES[sport]
    except KeyError as exc:
        raise ConfigError(f"unknown sport {sport!r}") from exc
    if config is None:
        config = load_config(sport, **config_overrides)
    elif config_overrides:
        raise ConfigError("pass either a config object or overrides, not both")
    return cls(config, num_envs, seed=seed, first_index=first_index,
               auto_reset=auto_reset)


def termination_rules(sport: str):
    """Ordered (reason, rule) pairs, excluding the implicit fault/time rules."""
    return ENV_CLASSES[sport].RULES


def check_termination(sport: str, snap, cfg: SportConfig | None = None):
    """Evaluate one sport's termination rules on a constructed snapshot.

    ``snap`` is any namespace carrying the sport's documented snapshot
    fields (see the environment card); returns None when no rule fires.
    """
    cfg = cfg or default_config(sport)
    reason = evaluate_termination(ENV_CLASSES[sport].RULES, snap, cfg)
    code = int(np.asarray(reason).ravel()[0])
    return TerminationReason(code) if code else None


def assemble_goal_obs(env: BatchEnv, env_index: int = 0, agent: int = 0):
    """Typed SportGoal plus the flat goal vector for one agent."""
    row = env_index * env.n_agents + agent
    vec = np.array(env._goalv[row], dtype=np.float64)
    return parse_goal(env.SPORT, vec, env.skeleton.joint_count), vec


__all__ = [
    "SPORTS", "ENV_CLASSES", "BatchEnv", "StepResult", "EpisodeSummary",
    "MatchState", "TerminationReason", "CurriculumConfig", "SportConfig",
    "default_config", "load_config", "hurdle_positions", "make_env",
    "batch_of", "termination_rules", "check_termination", "assemble_goal_obs",
]
