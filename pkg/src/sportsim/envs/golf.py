"""Golf: drive a ball across wave terrain toward a sampled target."""
from __future__ import annotations

import numpy as np

from .. import rewards
from ..physics import (DT_SIM, SinusoidalTerrain, StaticGeometry, effector_hit,
                       implement_from_markers)
from .base import BatchEnv, EpisodeSummary, TerminationReason
from .track import _combined_fall

BALL_BACKWARD_SLACK = 0.1
HEIGHTMAP_REFRESH_DIST = 0.25   # m of root motion before the patch recomputes
HEIGHTMAP_REFRESH_YAW = 0.1


def _golf_ball_backward(snap, cfg):
    return snap.ball_pos[:, 0] < snap.ball_spawn[:, 0] - BALL_BACKWARD_SLACK


def _golf_no_contact(snap, cfg):
    return (snap.elapsed_s > cfg.const("contact_timeout")) & ~snap.club_contact


def _golf_too_close(snap, cfg):
    # horizontal distance: the body is a vertical capsule over its root
    d = np.linalg.norm(snap.ball_pos[:, :2] - snap.root_pos[:, 0, :2], axis=-1)
    return d < cfg.const("too_close")


class GolfEnv(BatchEnv):
    """Single swing of a club-for-hand agent on sinusoidal terrain."""

    SPORT = "golf"
    GOAL_DIM = 9 + 32 * 32
    RULES = (
        (TerminationReason.FALL, _combined_fall),
        (TerminationReason.BALL_BACKWARD, _golf_ball_backward),
        (TerminationReason.NO_CONTACT_TIMEOUT, _golf_no_contact),
        (TerminationReason.BALL_TOO_CLOSE_TO_BODY, _golf_too_close),
    )

    def _alloc(self):
        n = self.num_envs
        c = self.cfg
        self.terrain = SinusoidalTerrain(c.const("terrain_amplitude"),
                                         c.const("terrain_wavelength"))
        self.geometry = StaticGeometry(terrain=self.terrain)
        self.ball_pos = np.zeros((n, 3))
        self.ball_vel = np.zeros((n, 3))
        self.prev_ball = np.zeros((n, 3))
        self.ball_spawn = np.zeros((n, 3))
        self.target = np.zeros((n, 3))
        self.club_contact = np.zeros(n, dtype=bool)
        self.club_pos = np.zeros((n, 3))
        self._prev_club = np.zeros((n, 3))
        self._club_vel = np.zeros((n, 3))
        self._markers = np.zeros((n, 5, 3))
        self._fault_scratch = np.zeros(n, dtype=bool)
        self._patch = np.zeros((n, 32, 32), dtype=np.float32)
        self._patch_root = np.full((n, 2), np.inf)
        self._patch_yaw = np.zeros(n)
        self.r_ball = c.const("ball_radius")
        self.snap.ball_pos = self.ball_pos
        self.snap.ball_spawn = self.ball_spawn
        self.snap.club_contact = self.club_contact

    def _spawn_one(self, env, rng):
        c = self.cfg
        bx = c.const("ball_spawn_x")
        bz = float(self.terrain.height(bx, 0.0)) + self.r_ball
        self.ball_pos[env] = (bx, 0.0, bz)
        self.ball_vel[env] = 0.0
        self.prev_ball[env] = self.ball_pos[env]
        self.ball_spawn[env] = self.ball_pos[env]
        dist = c.curriculum.sample(rng)
        self.target[env] = (dist, 0.0, float(self.terrain.height(dist, 0.0)))
        self.club_contact[env] = False
        self._patch_root[env] = np.inf
        row = env * self.n_agents
        mw = self.proxy.marker_world()[row]
        yaw = self.proxy.root_yaw[row]
        self._prev_club[env] = implement_from_markers(
            mw[None], np.cos(yaw), np.sin(yaw), "golf_club_head")[0]

    def _substep_objects(self):
        self.proxy.marker_world(out=self._markers)
        c, s = np.cos(self.proxy.root_yaw), np.sin(self.proxy.root_yaw)
        implement_from_markers(self._markers, c, s, "golf_club_head", out=self.club_pos)
        np.subtract(self.club_pos, self._prev_club, out=self._club_vel)
        self._club_vel /= DT_SIM
        np.copyto(self._prev_club, self.club_pos)
        hit, _ = effector_hit(self.ball_pos, self.ball_vel, self.club_pos,
                              self._club_vel, self.r_ball + 0.05, 0.8)
        self.club_contact |= hit
        self._fault_scratch[:] = False
        from ..physics import sphere_substep
        sphere_substep(self.ball_pos, self.ball_vel, self.r_ball,
                       self.cfg.const("restitution"), self.cfg.const("friction"),
                       DT_SIM, self.geometry, fault_out=self._fault_scratch)
        self.faulted |= self._fault_scratch

    def _save_prev(self):
        np.copyto(self.prev_ball, self.ball_pos)

    def _compute_rewards(self):
        bd = rewards.reward_golf(self.ball_pos, self.prev_ball, self.ball_vel,
                                 self.club_pos, self.target, self.club_contact)
        self.rewards[:, 0] = bd.total
        self.reward_terms.update(bd.terms)

    def _write_goal_obs(self):
        g = self._goalv
        self.to_local_points(self.ball_pos, out=g[:, 0:3])
        self.to_local_points(self.club_pos, out=g[:, 3:6])
        self.to_local_points(self.target, out=g[:, 6:9])
        root = self.proxy.root_pos[:, :2]
        yaw = self.proxy.root_yaw
        moved = (np.linalg.norm(root - self._patch_root, axis=-1) > HEIGHTMAP_REFRESH_DIST) \
            | (np.abs(yaw - self._patch_yaw) > HEIGHTMAP_REFRESH_YAW)
        for env in np.flatnonzero(moved):
            self._patch[env] = self.terrain.patch(
                root[env], float(yaw[env]),
                int(self.cfg.const("heightmap_size")), self.cfg.const("heightmap_extent"))
            self._patch_root[env] = root[env]
            self._patch_yaw[env] = yaw[env]
        g[:, 9:] = self._patch.reshape(self.num_envs, -1)

    def _summarize(self, env):
        hit = bool(self.club_contact[env])
        err = None
        if hit:
            err = float(np.linalg.norm(self.ball_pos[env, :2] - self.target[env, :2]))
        return EpisodeSummary(
            sport=self.SPORT, env_index=self.first_index + env,
            episode_index=int(self.episode_index[env]),
            steps=int(self.elapsed_steps[env]),
            reason=TerminationReason(int(self.reason[env])),
            success=hit, hits=int(hit),
            distance=float(np.linalg.norm(self.ball_pos[env, :2] - self.ball_spawn[env, :2])),
            error_distance=err,
            level=float(np.linalg.norm(self.target[env, :2] - self.ball_spawn[env, :2])))
