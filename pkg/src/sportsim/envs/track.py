"""Track & field environments: high jump, long jump, hurdling.

These sports reward progress in absolute track coordinates; their goal
observations are still heading-normalized like every other sport.
"""
from __future__ import annotations

import numpy as np

from .. import rewards
from .base import BatchEnv, EpisodeSummary, TerminationReason
from .config import hurdle_positions

FOOT_MARKERS = (2, 3)          # ankle marker rows in the proxy
FOOT_CLEARANCE = 0.05          # feet pass this far above an obstacle to clear
BODY_TOP = 0.75                # head clearance above the root
FALL_ROOT_Z = 0.15


def _combined_fall(snap, cfg):
    return np.any(snap.fallen | (snap.root_pos[..., 2] < FALL_ROOT_Z), axis=-1)


def _hj_bar_contact(snap, cfg):
    low = snap.foot_min_z - FOOT_CLEARANCE
    root_z = snap.root_pos[:, 0, 2]
    return snap.bar_crossing & (low <= snap.bar_height) & (root_z + BODY_TOP >= snap.bar_height)


def _hj_bar_not_cleared(snap, cfg):
    root_z = snap.root_pos[:, 0, 2]
    return snap.bar_crossing & (root_z + BODY_TOP < snap.bar_height)


def _hj_out_of_bounds(snap, cfg):
    x = snap.root_pos[:, 0, 0]
    y = snap.root_pos[:, 0, 1]
    return ((x < cfg.const("area_x_min")) | (x > cfg.const("area_x_max"))
            | (y < cfg.const("area_y_min")) | (y > cfg.const("area_y_max")))


def _track_off_track(snap, cfg):
    y = snap.root_pos[:, 0, 1]
    x = snap.root_pos[:, 0, 0]
    x_max = cfg.consts.get("area_x_max", cfg.consts.get("finish_x", 1e9) + 20.0)
    return (np.abs(y) > cfg.const("track_half_width")) | (x < -5.0) | (x > x_max)


class HighJumpEnv(BatchEnv):
    """Leap a bar on the way to a goal point two meters behind it."""

    SPORT = "high_jump"
    GOAL_DIM = 6
    RULES = (
        (TerminationReason.FALL, _combined_fall),
        (TerminationReason.BAR_CONTACT, _hj_bar_contact),
        (TerminationReason.BAR_NOT_CLEARED, _hj_bar_not_cleared),
        (TerminationReason.OUT_OF_BOUNDS, _hj_out_of_bounds),
    )

    def _alloc(self):
        n = self.num_envs
        c = self.cfg
        self.bar_height = np.full(n, 1.0)
        self.bar_pos = np.zeros((n, 3))
        self.bar_pos[:, 0] = c.const("bar_x")
        self.bar_pos[:, 1] = c.const("bar_y")
        self.goal_pos = np.array([c.const("goal_x"), c.const("goal_y"), c.const("goal_z")])
        self.bar_crossing = np.zeros(n, dtype=bool)
        self.cleared = np.zeros(n, dtype=bool)
        self.foot_min_z = np.zeros(n)
        self.max_root_z = np.zeros(n)
        self.snap.bar_crossing = self.bar_crossing
        self.snap.bar_height = self.bar_height
        self.snap.foot_min_z = self.foot_min_z

    def _spawn_agents(self, env, rng):
        c = self.cfg
        yaw = np.arctan2(c.const("bar_y"), c.const("bar_x"))
        self.set_agent(env, 0, (0.0, 0.0), yaw)

    def _spawn_one(self, env, rng):
        level = self.cfg.curriculum.sample(rng)
        self.bar_height[env] = level
        self.bar_pos[env, 2] = level
        self.bar_crossing[env] = False
        self.cleared[env] = False
        self.max_root_z[env] = self.proxy.root_pos[env * self.n_agents, 2]

    def _post_physics(self):
        p = self.proxy
        bar_x = self.cfg.const("bar_x")
        x = p.root_pos[:, 0]
        prev_x = self.prev_root_pos[:, 0]
        np.logical_and(prev_x < bar_x, x >= bar_x, out=self.bar_crossing)
        feet = p.marker_loc[:, FOOT_MARKERS, 2] + p.root_pos[:, 2][:, None]
        np.min(feet, axis=1, out=self.foot_min_z)
        np.maximum(self.max_root_z, p.root_pos[:, 2], out=self.max_root_z)
        self.cleared |= self.bar_crossing & (self.foot_min_z - FOOT_CLEARANCE > self.bar_height)

    def _compute_rewards(self):
        bd = rewards.reward_high_jump(self.proxy.root_pos, self.prev_root_pos,
                                      self.goal_pos)
        self.rewards[:, 0] = bd.total
        self.reward_terms.update(bd.terms)

    def _write_goal_obs(self):
        g = self._goalv
        self.to_local_points(self.bar_pos, out=g[:, 0:3])
        self.to_local_points(self.goal_pos, out=g[:, 3:6])

    def _summarize(self, env):
        return EpisodeSummary(
            sport=self.SPORT, env_index=self.first_index + env,
            episode_index=int(self.episode_index[env]),
            steps=int(self.elapsed_steps[env]),
            reason=TerminationReason(int(self.reason[env])),
            success=bool(self.cleared[env]),
            distance=float(self.max_root_z[env]),
            level=float(self.bar_height[env]))


class LongJumpEnv(BatchEnv):
    """Run a 20 m runway and leap past the jump line toward the pit."""

    SPORT = "long_jump"
    GOAL_DIM = 9
    RULES = (
        (TerminationReason.FALL, _combined_fall),
        (TerminationReason.OFF_TRACK, _track_off_track),
    )

    def _alloc(self):
        n = self.num_envs
        c = self.cfg
        self.goal_pos = np.array([c.const("goal_x"), c.const("goal_y"), c.const("goal_z")])
        self.line_x = c.const("line_x")
        self.start_pos = np.zeros(3)
        self.line_pos = np.array([self.line_x, 0.0, 0.0])
        self.takeoff_x = np.full(n, np.nan)
        self.landing_x = np.full(n, np.nan)
        self.crossed_airborne = np.zeros(n, dtype=bool)
        self.prev_grounded = np.ones(n, dtype=bool)

    def _spawn_one(self, env, rng):
        self.takeoff_x[env] = np.nan
        self.landing_x[env] = np.nan
        self.crossed_airborne[env] = False
        self.prev_grounded[env] = True

    def _post_physics(self):
        p = self.proxy
        x = p.root_pos[:, 0]
        grounded = p.grounded
        took_off = self.prev_grounded & ~grounded & np.isnan(self.takeoff_x)
        self.takeoff_x[took_off] = x[took_off]
        crossing = (self.prev_root_pos[:, 0] < self.line_x) & (x >= self.line_x)
        self.crossed_airborne |= crossing & ~grounded
        landed = (~self.prev_grounded) & grounded & self.crossed_airborne \
            & np.isnan(self.landing_x)
        self.landing_x[landed] = x[landed]
        np.copyto(self.prev_grounded, grounded)

    def _compute_rewards(self):
        bd = rewards.reward_long_jump(self.proxy.root_pos, self.prev_root_pos,
                                      self.proxy.root_vel, self.goal_pos, self.line_x)
        self.rewards[:, 0] = bd.total
        self.reward_terms.update(bd.terms)

    def _write_goal_obs(self):
        g = self._goalv
        self.to_local_points(self.start_pos, out=g[:, 0:3])
        self.to_local_points(self.line_pos, out=g[:, 3:6])
        self.to_local_points(self.goal_pos, out=g[:, 6:9])

    def _summarize(self, env):
        landed = not np.isnan(self.landing_x[env])
        took_off = self.takeoff_x[env]
        legal = (not np.isnan(took_off)) and took_off <= self.line_x
        success = bool(self.crossed_airborne[env] and landed and legal)
        return EpisodeSummary(
            sport=self.SPORT, env_index=self.first_index + env,
            episode_index=int(self.episode_index[env]),
            steps=int(self.elapsed_steps[env]),
            reason=TerminationReason(int(self.reason[env])),
            success=success,
            distance=float(self.landing_x[env] - self.line_x) if landed else None)


class HurdlingEnv(BatchEnv):
    """110 m dash over ten hurdles; heights are resampled per episode."""

    SPORT = "hurdling"
    GOAL_DIM = 33
    RULES = (
        (TerminationReason.FALL, _combined_fall),
        (TerminationReason.OFF_TRACK, _track_off_track),
    )

    def _alloc(self):
        n = self.num_envs
        c = self.cfg
        self.hurdle_x = np.asarray(hurdle_positions(
            c.const("first_hurdle_x"), c.const("hurdle_spacing"),
            int(c.const("hurdle_count"))))
        self.finish_x = c.const("finish_x")
        self.goal_pos = np.array([self.finish_x, 0.0, 1.0])
        self.hurdle_heights = np.full((n, len(self.hurdle_x)), c.const("hurdle_height"))
        self.finished = np.zeros(n, dtype=bool)
        self.finish_step = np.full(n, -1, dtype=np.int64)
        self.max_x = np.zeros(n)
        self.foot_min_z = np.zeros(n)
        self._hurdle_world = np.zeros((n, len(self.hurdle_x), 3))
        self._hurdle_world[:, :, 0] = self.hurdle_x

    def _spawn_one(self, env, rng):
        c = self.cfg.curriculum
        if c.mode == "uniform" and c.fixed_level is None:
            self.hurdle_heights[env] = rng.uniform(c.low, c.high, size=len(self.hurdle_x))
        else:
            self.hurdle_heights[env] = c.sample(rng)
        self.finished[env] = False
        self.finish_step[env] = -1
        self.max_x[env] = 0.0

    def _post_physics(self):
        p = self.proxy
        x = p.root_pos[:, 0]
        prev_x = self.prev_root_pos[:, 0]
        feet = p.marker_loc[:, FOOT_MARKERS, 2] + p.root_pos[:, 2][:, None]
        np.min(feet, axis=1, out=self.foot_min_z)
        crossing = (prev_x[:, None] < self.hurdle_x) & (x[:, None] >= self.hurdle_x)
        tripped = np.any(crossing & (self.foot_min_z[:, None] < self.hurdle_heights), axis=1)
        self.proxy.fallen |= tripped
        just_finished = ~self.finished & (x >= self.finish_x)
        self.finish_step[just_finished] = self.elapsed_steps[just_finished]
        self.finished |= just_finished
        np.maximum(self.max_x, x, out=self.max_x)

    def _compute_rewards(self):
        bd = rewards.reward_hurdling(self.proxy.root_pos, self.prev_root_pos,
                                     self.goal_pos)
        self.rewards[:, 0] = bd.total
        self.reward_terms.update(bd.terms)

    def _write_goal_obs(self):
        g = self._goalv
        hview = g[:, :30].reshape(self.num_envs, 10, 3)
        self._hurdle_world[:, :, 2] = self.hurdle_heights
        self.to_local_points(self._hurdle_world, out=hview)
        self.to_local_points(self.goal_pos, out=g[:, 30:33])

    def _summarize(self, env):
        finished = bool(self.finished[env])
        return EpisodeSummary(
            sport=self.SPORT, env_index=self.first_index + env,
            episode_index=int(self.episode_index[env]),
            steps=int(self.elapsed_steps[env]),
            reason=TerminationReason(int(self.reason[env])),
            success=finished,
            distance=float(self.max_x[env]),
            event_time=float(self.finish_step[env] / 30.0) if finished else None)
