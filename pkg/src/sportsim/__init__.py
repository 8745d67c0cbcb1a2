"""sportsim: deterministic batch-vectorized humanoid sports environments.

A numpy engine for eleven physically grounded sports tasks (track & field,
golf, javelin, racket sports, combat sports, soccer, basketball): exact
goal-state observations, reward kernels, termination rules, ballistic
predictors, curriculum samplers, scoring state machines, self-play
scheduling, and evaluation metrics over a pluggable dynamics backend with
a built-in reduced proxy humanoid.
"""

__version__ = "0.1.0"

from . import ballistics, core, metrics, physics, rewards, selfplay  # noqa: F401
from .core import (ArenaBounds, BodyState, ContactSet, ObjectKinematics,
                   SkeletonSpec, heading_normalize, yaw_of)  # noqa: F401
from .rewards import RewardBreakdown  # noqa: F401
