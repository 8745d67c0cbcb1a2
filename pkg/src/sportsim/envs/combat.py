"""Fencing and boxing: 1v1 strike-to-target sports in bounded arenas.

A point is scored when the striking implement (sword tip or hand) is within
the point distance of one of the five target bodies (pelvis, head, spine,
chest, torso) with enough estimated contact force; scoring ends the episode,
as does falling or stepping out of the arena.
"""
from __future__ import annotations

import numpy as np

from .. import rewards
from ..physics import DT_POLICY, implement_from_markers
from .base import BatchEnv, EpisodeSummary, TerminationReason
from .track import _combined_fall

TARGET_BODY_NAMES = ("Pelvis", "Head", "Spine", "Chest", "Torso")
STRIKE_EFF_MASS = 1.0
GROUND_SUPPORT_N = 60.0 * 9.81 / 2.0   # per-ankle share of body weight


def _combat_out_of_bounds(snap, cfg):
    xy = snap.root_pos[..., :2]
    half_l = snap.arena_half[0]
    half_w = snap.arena_half[1]
    out = (np.abs(xy[..., 0]) > half_l) | (np.abs(xy[..., 1]) > half_w)
    return np.any(out, axis=-1)


def _combat_point(snap, cfg):
    return np.any(snap.point_now, axis=-1)


class CombatEnvBase(BatchEnv):
    RULES = (
        (TerminationReason.FALL, _combined_fall),
        (TerminationReason.OUT_OF_BOUNDS, _combat_out_of_bounds),
        (TerminationReason.POINT_SCORED, _combat_point),
    )
    HAS_BOUNDS_OBS = False
    IMPLEMENT = ""

    def _alloc(self):
        n, a = self.num_envs, self.n_agents
        m = n * a
        j = self.skeleton.joint_count
        c = self.cfg
        self._arena_half = np.array([self._arena_dims()[0] / 2.0,
                                     self._arena_dims()[1] / 2.0])
        self.tip_pos = np.zeros((m, 3))
        self.tip_prev = np.zeros((m, 3))
        self._tip_fresh = np.zeros(m, dtype=bool)
        self.tip_prev_min = np.full(m, np.inf)
        self.tip_min_dist = np.full(m, np.inf)
        self.tip_sweep_dist = np.full(m, np.inf)
        self.tip_force = np.zeros(m)
        self.point_now = np.zeros((n, a), dtype=bool)
        self.body_force_sq = np.zeros((m, j))
        self.targets = np.zeros((m, len(TARGET_BODY_NAMES), 3))
        self._target_joint_idx = np.array(
            [self.skeleton.index_of(nm) for nm in TARGET_BODY_NAMES])
        self._markers = np.zeros((m, 5, 3))
        self._world_joints = np.zeros((m, j, 3))
        self._world_vels = np.zeros((m, j, 3))
        self._opp = (np.arange(m) ^ 1)  # partner row within each env pair
        self._ankle_joints = np.array([self.skeleton.index_of("L_Ankle"),
                                       self.skeleton.index_of("R_Ankle")])
        self.snap.arena_half = self._arena_half
        self.snap.point_now = self.point_now

    def _arena_dims(self):
        raise NotImplementedError

    def _spawn_agents(self, env, rng):
        gap = self.cfg.const("spawn_gap")
        self.set_agent(env, 0, (-gap / 2.0, 0.0), 0.0)
        self.set_agent(env, 1, (gap / 2.0, 0.0), np.pi)

    def _spawn_one(self, env, rng):
        rows = self.agent_rows(env)
        self.tip_prev_min[rows] = np.inf
        self._tip_fresh[rows] = True
        self.point_now[env] = False
        self.body_force_sq[rows] = 0.0

    def _fill_world_joints(self):
        p = self.proxy
        c, s = np.cos(p.root_yaw), np.sin(p.root_yaw)
        off = self._offsets
        w = self._world_joints
        w[..., 0] = p.root_pos[:, None, 0] + c[:, None] * off[:, 0] - s[:, None] * off[:, 1]
        w[..., 1] = p.root_pos[:, None, 1] + s[:, None] * off[:, 0] + c[:, None] * off[:, 1]
        w[..., 2] = p.root_pos[:, None, 2] + off[:, 2]
        mw = p.marker_world(out=self._markers)
        ee = np.asarray(self.skeleton.end_effectors)
        w[:, ee, :] = mw
        v = self._world_vels
        v[:] = p.root_vel[:, None, :]
        v[:, ee, :] = p.marker_world_vel()

    def _post_physics(self):
        self._fill_world_joints()
        c, s = np.cos(self.proxy.root_yaw), np.sin(self.proxy.root_yaw)
        np.copyto(self.tip_prev, self.tip_pos)
        implement_from_markers(self._markers, c, s, self.IMPLEMENT, out=self.tip_pos)
        self.tip_prev[self._tip_fresh] = self.tip_pos[self._tip_fresh]
        self._tip_fresh[:] = False
        np.copyto(self.targets, self._world_joints[:, self._target_joint_idx, :])
        opp_targets = self.targets[self._opp]
        d2 = np.sum((self.tip_pos[:, None, :] - opp_targets) ** 2, axis=-1)
        nearest = np.argmin(d2, axis=-1)
        np.sqrt(np.min(d2, axis=-1), out=self.tip_min_dist)
        # swept contact: closest approach of the tip's path over this
        # control step to each target, so fast strikes cannot tunnel
        # through the contact window between 30 Hz samples
        seg = self.tip_pos - self.tip_prev
        rel = opp_targets - self.tip_prev[:, None, :]
        seg_len2 = np.maximum(np.sum(seg * seg, axis=-1), 1e-12)
        t_star = np.clip(np.sum(rel * seg[:, None, :], axis=-1)
                         / seg_len2[:, None], 0.0, 1.0)
        closest = self.tip_prev[:, None, :] + t_star[..., None] * seg[:, None, :]
        sweep_d2 = np.sum((closest - opp_targets) ** 2, axis=-1)
        np.sqrt(np.min(sweep_d2, axis=-1), out=self.tip_sweep_dist)
        # contact force estimate: impulse of the tip-target relative
        # velocity over one control step (targets ride the opponent root)
        rel_vel = seg / DT_POLICY - self.proxy.root_vel[self._opp]
        self.tip_force[:] = STRIKE_EFF_MASS * np.linalg.norm(rel_vel, axis=-1) \
            / DT_POLICY
        np.copyto(self.tip_prev_min, self.tip_min_dist)
        point_rows = ((self.tip_sweep_dist <= self.cfg.const("point_distance"))
                      & (self.tip_force >= self.cfg.const("point_force")))
        self.point_now[:] = point_rows.reshape(self.num_envs, self.n_agents)
        for env, agent in zip(*np.nonzero(self.point_now)):
            self.scores[env, agent] += 1
            self.point_latch[env] = True
        # per-body contact forces: ground support + received strikes
        self.body_force_sq[:] = 0.0
        grounded = self.proxy.grounded
        sup = np.where(grounded, GROUND_SUPPORT_N ** 2, 0.0)
        self.body_force_sq[:, self._ankle_joints[0]] = sup
        self.body_force_sq[:, self._ankle_joints[1]] = sup
        struck = point_rows | ((self.tip_sweep_dist <= self.cfg.const("point_distance"))
                               & (self.tip_force > 0.0))
        rows = np.flatnonzero(struck)
        if len(rows):
            opp_rows = self._opp[rows]
            body = self._target_joint_idx[nearest[rows]]
            self.body_force_sq[opp_rows, body] += self.tip_force[rows] ** 2

    def _compute_rewards(self):
        p = self.proxy
        heading = np.stack([np.cos(p.root_yaw), np.sin(p.root_yaw)], axis=-1)
        bd = rewards.reward_combat(
            p.root_pos, heading, p.root_vel, p.root_pos[self._opp],
            self.tip_pos, self.targets[self._opp],
            self.point_now.reshape(-1))
        self.rewards[:] = np.asarray(bd.total).reshape(self.num_envs, self.n_agents)
        self.reward_terms.update(bd.terms)

    def _write_goal_obs(self):
        g = self._goalv
        j = self.skeleton.joint_count
        opp_j = self._world_joints[self._opp]
        opp_v = self._world_vels[self._opp]
        n_j = j * 3
        self.to_local_points(opp_j, out=g[:, :n_j].reshape(-1, j, 3))
        self.to_local_vectors(opp_v, out=g[:, n_j:2 * n_j].reshape(-1, j, 3))
        diffs = self.tip_pos[:, None, :] - self.targets[self._opp]
        self.to_local_vectors(diffs, out=g[:, 2 * n_j:2 * n_j + 15].reshape(-1, 5, 3))
        base = 2 * n_j + 15
        g[:, base:base + j] = self.body_force_sq
        g[:, base + j:base + 2 * j] = self.body_force_sq[self._opp]
        if self.HAS_BOUNDS_OBS:
            xy = self.proxy.root_pos[:, :2]
            b = g[:, base + 2 * j:base + 2 * j + 4]
            b[:, 0] = xy[:, 0] + self._arena_half[0]
            b[:, 1] = self._arena_half[0] - xy[:, 0]
            b[:, 2] = xy[:, 1] + self._arena_half[1]
            b[:, 3] = self._arena_half[1] - xy[:, 1]

    def _summarize(self, env):
        sc = (int(self.scores[env, 0]), int(self.scores[env, 1]))
        return EpisodeSummary(
            sport=self.SPORT, env_index=self.first_index + env,
            episode_index=int(self.episode_index[env]),
            steps=int(self.elapsed_steps[env]),
            reason=TerminationReason(int(self.reason[env])),
            success=bool(self.point_latch[env]), scores=sc)


class FencingEnv(CombatEnvBase):
    SPORT = "fencing"
    IMPLEMENT = "fencing_sword_tip"
    HAS_BOUNDS_OBS = True
    GOAL_DIM = 24 * 3 + 24 * 3 + 5 * 3 + 24 + 24 + 4  # 211

    def _arena_dims(self):
        return (self.cfg.const("piste_length"), self.cfg.const("piste_width"))


class BoxingEnv(CombatEnvBase):
    SPORT = "boxing"
    IMPLEMENT = "boxing_hand"
    HAS_BOUNDS_OBS = False
    GOAL_DIM = 24 * 3 + 24 * 3 + 5 * 3 + 24 + 24  # 207

    def _arena_dims(self):
        return (self.cfg.const("ring_length"), self.cfg.const("ring_width"))
