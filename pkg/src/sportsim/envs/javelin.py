"""Javelin throw with the articulated-hand (52-joint) skeleton.

The javelin rides the right hand until the grip channel releases it, then
flies ballistically holding its launch orientation. Reward stages are keyed
on the episode timer.
"""
from __future__ import annotations

import numpy as np

from .. import rewards
from ..core import quat_from_yaw, quat_mul, rot6d_from_matrix, rot_y
from ..physics import DT_SIM, GRAVITY
from .base import BatchEnv, EpisodeSummary, TerminationReason
from .track import _combined_fall

LANDED_Z = 0.2
RELEASE_GRACE = 0.2  # s after the flight stage opens before "not released" fires


def _jav_detached(snap, cfg):
    pre_flight = snap.elapsed_s < cfg.const("stage2_end")
    return pre_flight & (snap.hand_javelin_dist > cfg.const("detached_dist"))


def _jav_pose_deviation(snap, cfg):
    pre_flight = snap.elapsed_s < cfg.const("stage2_end")
    return pre_flight & (snap.javelin_pose_err > cfg.const("pose_deviation"))


def _jav_not_released(snap, cfg):
    flight = snap.elapsed_s >= cfg.const("stage2_end") + RELEASE_GRACE
    return flight & (snap.hand_javelin_dist < cfg.const("not_released_dist"))


class JavelinEnv(BatchEnv):
    SPORT = "javelin"
    GOAL_DIM = 19
    RULES = (
        (TerminationReason.FALL, _combined_fall),
        (TerminationReason.JAVELIN_DETACHED, _jav_detached),
        (TerminationReason.JAVELIN_POSE_DEVIATION, _jav_pose_deviation),
        (TerminationReason.JAVELIN_NOT_RELEASED, _jav_not_released),
    )

    def _alloc(self):
        n = self.num_envs
        pitch = np.deg2rad(self.cfg.const("default_pitch_deg"))
        # default pose: long axis facing +x, tilted up by the pitch
        self._default_mat = rot_y(-pitch)
        self.default_rot6 = rot6d_from_matrix(self._default_mat)
        w = np.cos(-pitch / 2.0)
        y = np.sin(-pitch / 2.0)
        self._default_quat = np.array([w, 0.0, y, 0.0])
        self.jav_pos = np.zeros((n, 3))
        self.jav_vel = np.zeros((n, 3))
        self.prev_jav = np.zeros((n, 3))
        self.jav_rot6 = np.tile(self.default_rot6, (n, 1))
        self.jav_quat = np.tile(self._default_quat, (n, 1))
        self.attached = np.ones(n, dtype=bool)
        self.released = np.zeros(n, dtype=bool)
        self.landed = np.zeros(n, dtype=bool)
        self.landing_x = np.full(n, np.nan)
        self.hand_pos = np.zeros((n, 3))
        self.hand_vel = np.zeros((n, 3))
        self._markers = np.zeros((n, 5, 3))
        self._marker_vels = np.zeros((n, 5, 3))
        self.hand_javelin_dist = np.zeros(n)
        self.javelin_pose_err = np.zeros(n)
        self.snap.hand_javelin_dist = self.hand_javelin_dist
        self.snap.javelin_pose_err = self.javelin_pose_err

    def _spawn_one(self, env, rng):
        row = env * self.n_agents
        self.proxy.marker_world(out=self._markers)
        self.jav_pos[env] = self._markers[row, 1]
        self.jav_vel[env] = 0.0
        self.prev_jav[env] = self.jav_pos[env]
        self.jav_rot6[env] = self.default_rot6
        self.jav_quat[env] = self._default_quat
        self.attached[env] = True
        self.released[env] = False
        self.landed[env] = False
        self.landing_x[env] = np.nan

    def _substep_objects(self):
        self.proxy.marker_world(out=self._markers)
        self.proxy.marker_world_vel(out=self._marker_vels)
        np.copyto(self.hand_pos, self._markers[:, 1])
        np.copyto(self.hand_vel, self._marker_vels[:, 1])
        release = self.attached & ~self.proxy.grip
        self.attached &= ~release
        self.released |= release
        held = self.attached
        self.jav_pos[held] = self.hand_pos[held]
        self.jav_vel[held] = self.hand_vel[held]
        free = ~held & ~self.landed
        self.jav_vel[free, 2] -= GRAVITY * DT_SIM
        self.jav_pos[free] += self.jav_vel[free] * DT_SIM
        touch = free & (self.jav_pos[:, 2] <= LANDED_Z)
        self.landing_x[touch] = self.jav_pos[touch, 0]
        self.jav_pos[touch, 2] = LANDED_Z
        self.jav_vel[touch] = 0.0
        self.landed |= touch

    def _save_prev(self):
        np.copyto(self.prev_jav, self.jav_pos)

    def _post_physics(self):
        d = self.jav_pos - self.hand_pos
        np.sqrt(np.sum(d * d, axis=-1), out=self.hand_javelin_dist)
        diff = self.jav_rot6 - self.default_rot6
        np.sum(diff * diff, axis=-1, out=self.javelin_pose_err)

    def _compute_rewards(self):
        row0 = slice(0, None, self.n_agents)
        bd = rewards.reward_javelin(
            self.elapsed_s, self.hand_pos, self.jav_pos, self.prev_jav,
            self.jav_rot6, self.default_rot6,
            self.proxy.root_pos[row0], self.root_spawn[row0])
        self.rewards[:, 0] = bd.total
        self.reward_terms.update(bd.terms)

    def _write_goal_obs(self):
        g = self._goalv
        self.to_local_points(self.jav_pos, out=g[:, 0:3])
        q = quat_mul(quat_from_yaw(-self.proxy.root_yaw), self.jav_quat)
        g[:, 3:7] = q
        self.to_local_vectors(self.jav_vel, out=g[:, 7:10])
        g[:, 10:13] = 0.0  # javelin angular velocity (no tumble in the proxy)
        self.to_local_points(self.proxy.root_pos, out=g[:, 13:16])
        self.to_local_points(self.hand_pos, out=g[:, 16:19])

    def _summarize(self, env):
        ok = bool(self.released[env] and self.landed[env]
                  and self.landing_x[env] > 0.0)
        return EpisodeSummary(
            sport=self.SPORT, env_index=self.first_index + env,
            episode_index=int(self.episode_index[env]),
            steps=int(self.elapsed_steps[env]),
            reason=TerminationReason(int(self.reason[env])),
            success=ok,
            distance=float(self.landing_x[env]) if self.landed[env] else None)
