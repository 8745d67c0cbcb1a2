"""Basketball environments: free throw, and exposed 1v1/2v2 team play.

The free throw starts 4.5 m from a 3 m hoop with the ball held between the
hands; releasing the grip lets it fly, and a made basket is a downward
crossing of the hoop plane inside the ring. Team play reuses the soccer
match scaffolding with hoops as goals and hand-only ball contact; it is
exposed without any claim of emergent behavior.
"""
from __future__ import annotations

import numpy as np

from .. import rewards
from ..physics import DT_SIM, StaticGeometry, effector_hit, sphere_substep
from .base import BatchEnv, EpisodeSummary, TerminationReason
from .track import _combined_fall

HAND_REACH = 0.06
HOLD_OFFSET = np.array([0.15, 0.0, 0.0])


def _ball_grounded(snap, cfg):
    return snap.ball_grounded


def _basket_scored(snap, cfg):
    return snap.basket_event != 0


class FreeThrowEnv(BatchEnv):
    SPORT = "free_throw"
    GOAL_DIM = 3 + 6 + 4 + 3
    RULES = (
        (TerminationReason.FALL, _combined_fall),
        (TerminationReason.POINT_SCORED, _basket_scored),
        (TerminationReason.LOST_POINT, _ball_grounded),
    )

    def _alloc(self):
        n = self.num_envs
        c = self.cfg
        self.r_ball = c.const("ball_radius")
        self.hoop_center = np.array([c.const("throw_distance"), 0.0,
                                     c.const("hoop_height")])
        self.hoop_radius = c.const("hoop_radius")
        self.ball_pos = np.zeros((n, 3))
        self.ball_vel = np.zeros((n, 3))
        self.held = np.ones(n, dtype=bool)
        self.ball_grounded = np.zeros(n, dtype=bool)
        self.basket_event = np.zeros(n, dtype=np.int64)
        self._prev_ball_z = np.zeros(n)
        self._markers = np.zeros((n, 5, 3))
        self._marker_vels = np.zeros((n, 5, 3))
        self._fault_scratch = np.zeros(n, dtype=bool)
        self.geometry = StaticGeometry()
        self.snap.ball_grounded = self.ball_grounded
        self.snap.basket_event = self.basket_event

    def _hold_point(self, rows=slice(None)):
        """Midpoint of the two hand markers plus a forward offset."""
        mid = 0.5 * (self._markers[rows, 0] + self._markers[rows, 1])
        c = np.cos(self.proxy.root_yaw[rows])
        s = np.sin(self.proxy.root_yaw[rows])
        mid[..., 0] += c * HOLD_OFFSET[0]
        mid[..., 1] += s * HOLD_OFFSET[0]
        return mid

    def _spawn_one(self, env, rng):
        self.proxy.marker_world(out=self._markers)
        self.ball_pos[env] = self._hold_point()[env]
        self.ball_vel[env] = 0.0
        self.held[env] = True
        self.ball_grounded[env] = False
        self.basket_event[env] = 0
        self._prev_ball_z[env] = self.ball_pos[env, 2]

    def _substep_objects(self):
        self.proxy.marker_world(out=self._markers)
        self.proxy.marker_world_vel(out=self._marker_vels)
        self._prev_ball_z[:] = self.ball_pos[:, 2]
        release = self.held & ~self.proxy.grip
        self.held &= ~release
        held = self.held
        if np.any(held):
            hold = self._hold_point()
            vel = 0.5 * (self._marker_vels[:, 0] + self._marker_vels[:, 1])
            self.ball_pos[held] = hold[held]
            self.ball_vel[held] = vel[held]
        free = ~held
        if np.any(free):
            pos = self.ball_pos.copy()
            vel = self.ball_vel.copy()
            for marker in (0, 1):
                effector_hit(pos, vel, self._markers[:, marker],
                             self._marker_vels[:, marker],
                             self.r_ball + HAND_REACH, 0.6)
            self.ball_pos[free] = pos[free]
            self.ball_vel[free] = vel[free]
            self._fault_scratch[:] = False
            p2 = self.ball_pos.copy()
            v2 = self.ball_vel.copy()
            sphere_substep(p2, v2, self.r_ball, self.cfg.const("restitution"),
                           self.cfg.const("friction"), DT_SIM, self.geometry,
                           fault_out=self._fault_scratch)
            self.ball_pos[free] = p2[free]
            self.ball_vel[free] = v2[free]
            self.faulted |= self._fault_scratch & free
            grounded = free & (self.ball_pos[:, 2] <= self.r_ball + 1e-3) \
                & (np.abs(self.ball_vel[:, 2]) < 0.5)
            self.ball_grounded |= grounded
        self._detect_basket()

    def _detect_basket(self):
        z_h = self.hoop_center[2]
        descending = (self._prev_ball_z > z_h) & (self.ball_pos[:, 2] <= z_h)
        if not np.any(descending):
            return
        dxy = np.linalg.norm(self.ball_pos[:, :2] - self.hoop_center[:2], axis=-1)
        made = descending & (dxy <= self.hoop_radius - self.r_ball * 0.5) \
            & (self.basket_event == 0) & ~self.held
        self.basket_event[made] = 1
        self.scores[made, 0] += 1
        self.point_latch |= made

    def _compute_rewards(self):
        # guard the desired-velocity solver against ball/hoop coincidence
        d = np.linalg.norm(self.ball_pos - self.hoop_center, axis=-1)
        degenerate = d < 1e-9
        ball = np.where(degenerate[:, None],
                        self.hoop_center + np.array([1.0, 0.0, 0.0]), self.ball_pos)
        bd = rewards.reward_free_throw(ball, self.ball_vel, self.hoop_center,
                                       self.basket_event == 1)
        total = np.asarray(bd.total, dtype=np.float64).copy()
        total[degenerate] = 0.0
        self.faulted |= degenerate
        self.rewards[:, 0] = total
        self.reward_terms.update(bd.terms)

    def _write_goal_obs(self):
        g = self._goalv
        self.to_local_points(self.ball_pos, out=g[:, 0:3])
        self.to_local_vectors(self.ball_vel, out=g[:, 3:6])
        g[:, 6:9] = 0.0
        self.to_local_points(self.hoop_center, out=self._scratch_m3)
        g[:, 9] = self._scratch_m3[:, 0]
        g[:, 10] = self._scratch_m3[:, 1]
        g[:, 11] = self.hoop_radius
        g[:, 12] = self.hoop_center[2]
        self.to_local_points(self.hoop_center, out=g[:, 13:16])

    def _summarize(self, env):
        return EpisodeSummary(
            sport=self.SPORT, env_index=self.first_index + env,
            episode_index=int(self.episode_index[env]),
            steps=int(self.elapsed_steps[env]),
            reason=TerminationReason(int(self.reason[env])),
            success=bool(self.basket_event[env] == 1),
            scores=(int(self.scores[env, 0]), int(self.scores[env, 1])))


class BasketballMatchEnv(BatchEnv):
    """Team basketball scaffold: hoops at both ends, hand-only contact."""

    SPORT = "basketball_match"
    RULES = (
        (TerminationReason.POINT_SCORED, _basket_scored),
        (TerminationReason.OUT_OF_BOUNDS, lambda snap, cfg: snap.ball_out),
    )

    def __init__(self, cfg, num_envs, seed=0, first_index=0, auto_reset=True):
        per_side = cfg.n_agents // 2
        n_others = per_side - 1 + per_side
        self.GOAL_DIM = 3 + 6 + 4 + 3 * n_others
        super().__init__(cfg, num_envs, seed, first_index, auto_reset)

    def _alloc(self):
        n, a = self.num_envs, self.n_agents
        m = n * a
        c = self.cfg
        self.half_l = c.const("court_length") / 2.0
        self.half_w = c.const("court_width") / 2.0
        self.r_ball = c.const("ball_radius")
        self.hoop_radius = c.const("hoop_radius")
        self.hoop_z = c.const("hoop_height")
        self.team = np.tile([0, 0, 1, 1][:a] if a == 4 else [0, 1], n)
        sign = np.where(self.team == 0, 1.0, -1.0)
        self.attack_hoop = np.zeros((m, 3))
        self.attack_hoop[:, 0] = sign * (self.half_l - 1.2)
        self.attack_hoop[:, 2] = self.hoop_z
        self.ball_pos = np.zeros((n, 3))
        self.ball_vel = np.zeros((n, 3))
        self.prev_ball = np.zeros((n, 3))
        self._prev_ball_z = np.zeros(n)
        self.ball_out = np.zeros(n, dtype=bool)
        self.basket_event = np.zeros(n, dtype=np.int64)
        self.scored_signal = np.zeros(m)
        self._markers = np.zeros((m, 5, 3))
        self._marker_vels = np.zeros((m, 5, 3))
        self._fault_scratch = np.zeros(n, dtype=bool)
        self.geometry = StaticGeometry()
        self.snap.ball_out = self.ball_out
        self.snap.basket_event = self.basket_event

    def _spawn_agents(self, env, rng):
        gap = self.cfg.const("spawn_gap")
        per_side = self.n_agents // 2
        agent = 0
        for sgn in (-1.0, 1.0):
            for k in range(per_side):
                y = 0.0 if per_side == 1 else (2.0 if k == 0 else -2.0)
                self.set_agent(env, agent, (sgn * gap / 2.0, y), 0.0 if sgn < 0 else np.pi)
                agent += 1

    def _spawn_one(self, env, rng):
        self.ball_pos[env] = (0.0, 0.0, 1.2)
        self.ball_vel[env] = 0.0
        self.prev_ball[env] = self.ball_pos[env]
        self.ball_out[env] = False
        self.basket_event[env] = 0
        self._prev_ball_z[env] = 1.2

    def _save_prev(self):
        np.copyto(self.prev_ball, self.ball_pos)

    def _substep_objects(self):
        m = self.num_envs * self.n_agents
        a = self.n_agents
        self.proxy.marker_world(out=self._markers)
        self.proxy.marker_world_vel(out=self._marker_vels)
        self._prev_ball_z[:] = self.ball_pos[:, 2]
        for agent in range(a):
            rows = slice(agent, m, a)
            for marker in (0, 1):  # hands only: basketball forbids foot contact
                effector_hit(self.ball_pos, self.ball_vel,
                             self._markers[rows, marker], self._marker_vels[rows, marker],
                             self.r_ball + HAND_REACH, 0.6)
        self._fault_scratch[:] = False
        sphere_substep(self.ball_pos, self.ball_vel, self.r_ball,
                       self.cfg.const("restitution"), self.cfg.const("friction"),
                       DT_SIM, self.geometry, fault_out=self._fault_scratch)
        self.faulted |= self._fault_scratch
        for sign in (1.0, -1.0):
            hoop_xy = np.array([sign * (self.half_l - 1.2), 0.0])
            descending = (self._prev_ball_z > self.hoop_z) & (self.ball_pos[:, 2] <= self.hoop_z)
            dxy = np.linalg.norm(self.ball_pos[:, :2] - hoop_xy, axis=-1)
            made = descending & (dxy <= self.hoop_radius - self.r_ball * 0.5) \
                & (self.basket_event == 0)
            self.basket_event[made] = int(sign)
        self.ball_out |= (np.abs(self.ball_pos[:, 0]) > self.half_l + 2.0) \
            | (np.abs(self.ball_pos[:, 1]) > self.half_w + 2.0)

    def _post_physics(self):
        ev = np.repeat(self.basket_event, self.n_agents)
        sign = np.where(self.team == 0, 1.0, -1.0)
        self.scored_signal[:] = np.where(ev != 0, ev * sign, 0.0)
        self.scores[self.basket_event == 1, 0] += 1
        self.scores[self.basket_event == -1, 1] += 1
        self.point_latch |= self.basket_event != 0

    def _compute_rewards(self):
        ball = np.repeat(self.ball_pos, self.n_agents, axis=0)
        prev_ball = np.repeat(self.prev_ball, self.n_agents, axis=0)
        ball_vel = np.repeat(self.ball_vel, self.n_agents, axis=0)
        w = self.cfg.weights
        bd = rewards.reward_soccer_match(
            self.proxy.root_pos, self.prev_root_pos, ball, prev_ball, ball_vel,
            self.attack_hoop, self.scored_signal,
            weights=(w["p2b"], w["b2g"], w["bv2g"], w["point"]))
        self.rewards[:] = np.asarray(bd.total).reshape(self.num_envs, self.n_agents)
        self.reward_terms.update(bd.terms)

    def _write_goal_obs(self):
        g = self._goalv
        ball = np.repeat(self.ball_pos, self.n_agents, axis=0)
        ball_vel = np.repeat(self.ball_vel, self.n_agents, axis=0)
        self.to_local_points(ball, out=g[:, 0:3])
        self.to_local_vectors(ball_vel, out=g[:, 3:6])
        g[:, 6:9] = 0.0
        self.to_local_points(self.attack_hoop, out=self._scratch_m3)
        g[:, 9] = self._scratch_m3[:, 0]
        g[:, 10] = self._scratch_m3[:, 1]
        g[:, 11] = self.hoop_radius
        g[:, 12] = self.hoop_z
        col = 13
        a = self.n_agents
        m = self.num_envs * a
        base = (np.arange(m) // a) * a
        for row_offset in range(1, a):
            other = base + (np.arange(m) % a + row_offset) % a
            self.to_local_points(self.proxy.root_pos[other], out=g[:, col:col + 3])
            col += 3

    def _summarize(self, env):
        sc = (int(self.scores[env, 0]), int(self.scores[env, 1]))
        return EpisodeSummary(
            sport=self.SPORT, env_index=self.first_index + env,
            episode_index=int(self.episode_index[env]),
            steps=int(self.elapsed_steps[env]),
            reason=TerminationReason(int(self.reason[env])),
            success=sc[0] > sc[1], scores=sc)
