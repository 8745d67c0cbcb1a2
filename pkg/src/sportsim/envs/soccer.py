"""Soccer environments: penalty kick and 1v1 / 2v2 team play.

The field is 32 x 20 m with 4 m x 2 m goals on the +-x goal lines. Agents
kick with their feet (and block with the body); the goal event interpolates
the ball's goal-plane crossing and checks it against the goal aperture.
"""
from __future__ import annotations

import numpy as np

from .. import rewards
from ..physics import DT_SIM, StaticGeometry, effector_hit, sphere_substep
from .base import BatchEnv, EpisodeSummary, TerminationReason
from .track import _combined_fall

KICK_FOOT_REACH = 0.12
KICK_BODY_REACH = 0.25


def _ball_out(snap, cfg):
    return snap.ball_out


def _goal_scored(snap, cfg):
    return snap.goal_event != 0


class SoccerEnvBase(BatchEnv):
    def _alloc_ball(self):
        n = self.num_envs
        c = self.cfg
        self.half_l = c.const("field_length") / 2.0
        self.half_w = c.const("field_width") / 2.0
        self.goal_half_w = c.const("goal_width") / 2.0
        self.goal_h = c.const("goal_height")
        self.r_ball = c.const("ball_diameter") / 2.0
        self.ball_pos = np.zeros((n, 3))
        self.ball_vel = np.zeros((n, 3))
        self.prev_ball = np.zeros((n, 3))
        self.prev_ball_sub = np.zeros((n, 3))
        self.ball_out = np.zeros(n, dtype=bool)
        self.goal_event = np.zeros(n, dtype=np.int64)  # +1 scored on +x goal, -1 on -x
        self.cross_yz = np.zeros((n, 2))
        self._markers = np.zeros((n * self.n_agents, 5, 3))
        self._marker_vels = np.zeros((n * self.n_agents, 5, 3))
        self._fault_scratch = np.zeros(n, dtype=bool)
        self.geometry = StaticGeometry()
        self.snap.ball_out = self.ball_out
        self.snap.goal_event = self.goal_event

    def _kick_contacts(self):
        """Feet and root push the ball; one effector pass per marker."""
        m = self.num_envs * self.n_agents
        self.proxy.marker_world(out=self._markers)
        self.proxy.marker_world_vel(out=self._marker_vels)
        a = self.n_agents
        for agent in range(a):
            rows = slice(agent, m, a)
            for marker in (2, 3):  # ankles
                effector_hit(self.ball_pos, self.ball_vel,
                             self._markers[rows, marker], self._marker_vels[rows, marker],
                             self.r_ball + KICK_FOOT_REACH, 0.7)
            effector_hit(self.ball_pos, self.ball_vel,
                         self.proxy.root_pos[rows], self.proxy.root_vel[rows],
                         self.r_ball + KICK_BODY_REACH, 0.3)

    def _step_ball(self):
        np.copyto(self.prev_ball_sub, self.ball_pos)
        self._kick_contacts()
        self._fault_scratch[:] = False
        sphere_substep(self.ball_pos, self.ball_vel, self.r_ball,
                       self.cfg.const("restitution"), self.cfg.const("friction"),
                       DT_SIM, self.geometry, fault_out=self._fault_scratch)
        self.faulted |= self._fault_scratch
        self._detect_goal()

    def _detect_goal(self):
        """Interpolated goal-line crossing inside the 4 x 2 m aperture."""
        x0, x1 = self.prev_ball_sub[:, 0], self.ball_pos[:, 0]
        for sign in (1.0, -1.0):
            plane = sign * self.half_l
            crossed = ((x0 - plane) * (x1 - plane) < 0.0) & (self.goal_event == 0)
            if not np.any(crossed):
                continue
            t = (plane - x0) / np.where(np.abs(x1 - x0) < 1e-12, 1e-12, x1 - x0)
            yc = self.prev_ball_sub[:, 1] + t * (self.ball_pos[:, 1] - self.prev_ball_sub[:, 1])
            zc = self.prev_ball_sub[:, 2] + t * (self.ball_pos[:, 2] - self.prev_ball_sub[:, 2])
            inside = (np.abs(yc) <= self.goal_half_w) & (zc <= self.goal_h) & (zc >= 0.0)
            goal = crossed & inside
            self.goal_event[goal] = int(sign)
            self.cross_yz[goal, 0] = yc[goal]
            self.cross_yz[goal, 1] = zc[goal]
            out = crossed & ~inside
            self.ball_out |= out
        self.ball_out |= (np.abs(self.ball_pos[:, 1]) > self.half_w + 1.0) \
            | (np.abs(self.ball_pos[:, 0]) > self.half_l + 2.0)

    def _save_prev(self):
        np.copyto(self.prev_ball, self.ball_pos)

    def _goal_post_obs(self, g, col, goal_center):
        """4-vector: heading-local xy of the goal center + half width + height."""
        self.to_local_points(goal_center, out=self._scratch_m3)
        g[:, col] = self._scratch_m3[:, 0]
        g[:, col + 1] = self._scratch_m3[:, 1]
        g[:, col + 2] = self.goal_half_w
        g[:, col + 3] = self.goal_h


class PenaltyKickEnv(SoccerEnvBase):
    SPORT = "penalty_kick"
    GOAL_DIM = 3 + 6 + 4 + 3  # ball, 6-velocity, goal box, target
    RULES = (
        (TerminationReason.FALL, _combined_fall),
        (TerminationReason.POINT_SCORED, _goal_scored),
        (TerminationReason.OUT_OF_BOUNDS, _ball_out),
    )

    def _alloc(self):
        self._alloc_ball()
        n = self.num_envs
        c = self.cfg
        self.goal_center = np.array([self.half_l, 0.0, 0.0])
        self.ball_spawn = np.zeros((n, 3))
        self.target = np.zeros((n, 3))
        self.scored = np.zeros(n, dtype=bool)
        self.error_dist = np.full(n, np.nan)

    def _spawn_agents(self, env, rng):
        c = self.cfg
        self.set_agent(env, 0, (self.half_l - c.const("agent_from_goal"), 0.0), 0.0)

    def _spawn_one(self, env, rng):
        c = self.cfg
        bx = self.half_l - c.const("ball_from_goal")
        self.ball_pos[env] = (bx, 0.0, self.r_ball)
        self.ball_vel[env] = 0.0
        self.prev_ball[env] = self.ball_pos[env]
        self.ball_spawn[env] = self.ball_pos[env]
        self.target[env] = (self.half_l,
                            rng.uniform(-self.goal_half_w + 0.2, self.goal_half_w - 0.2),
                            rng.uniform(0.2, self.goal_h - 0.2))
        self.ball_out[env] = False
        self.goal_event[env] = 0
        self.scored[env] = False
        self.error_dist[env] = np.nan

    def _substep_objects(self):
        self._step_ball()

    def _post_physics(self):
        new_goal = (self.goal_event == 1) & ~self.scored
        if np.any(new_goal):
            err = np.linalg.norm(self.cross_yz - self.target[:, 1:3], axis=-1)
            self.error_dist[new_goal] = err[new_goal]
            self.scores[new_goal, 0] += 1
            self.scored |= new_goal
            self.point_latch |= new_goal

    def _compute_rewards(self):
        bd = rewards.reward_penalty_kick(
            self.proxy.root_pos, self.prev_root_pos, self.ball_pos,
            self.prev_ball, self.ball_vel, self.target, self.ball_spawn[:, 0],
            no_dribble_penalty=self.cfg.const("no_dribble_penalty"))
        self.rewards[:, 0] = bd.total
        self.reward_terms.update(bd.terms)

    def _write_goal_obs(self):
        g = self._goalv
        self.to_local_points(self.ball_pos, out=g[:, 0:3])
        self.to_local_vectors(self.ball_vel, out=g[:, 3:6])
        g[:, 6:9] = 0.0  # ball angular velocity (spin not simulated)
        self._goal_post_obs(g, 9, self.goal_center)
        self.to_local_points(self.target, out=g[:, 13:16])

    def _summarize(self, env):
        err = self.error_dist[env]
        return EpisodeSummary(
            sport=self.SPORT, env_index=self.first_index + env,
            episode_index=int(self.episode_index[env]),
            steps=int(self.elapsed_steps[env]),
            reason=TerminationReason(int(self.reason[env])),
            success=bool(self.scored[env]),
            distance=float(np.linalg.norm(self.ball_pos[env, :2] - self.ball_spawn[env, :2])),
            error_distance=float(err) if np.isfinite(err) else None,
            scores=(int(self.scores[env, 0]), int(self.scores[env, 1])))


class SoccerMatchEnv(SoccerEnvBase):
    """1v1 (or 2v2) team play; team 0 attacks the +x goal."""

    SPORT = "soccer_match"
    RULES = (
        (TerminationReason.POINT_SCORED, _goal_scored),
        (TerminationReason.OUT_OF_BOUNDS, _ball_out),
    )

    def __init__(self, cfg, num_envs, seed=0, first_index=0, auto_reset=True):
        per_side = cfg.n_agents // 2
        n_others = per_side - 1 + per_side  # allies (minus self) + opponents
        self.GOAL_DIM = 3 + 6 + 4 + 3 * n_others
        super().__init__(cfg, num_envs, seed, first_index, auto_reset)

    def _alloc(self):
        if self.n_agents % 2 != 0:
            from ..errors import ConfigError
            raise ConfigError("soccer_match needs an even agent count")
        self._alloc_ball()
        m = self.num_envs * self.n_agents
        self.team = np.tile(np.repeat([0, 1], 1), self.num_envs) \
            if self.n_agents == 2 else np.tile([0, 0, 1, 1][:self.n_agents], self.num_envs)
        sign = np.where(self.team == 0, 1.0, -1.0)
        self.attack_goal = np.zeros((m, 3))
        self.attack_goal[:, 0] = sign * self.half_l
        self.scored_signal = np.zeros(m)

    def _spawn_agents(self, env, rng):
        gap = self.cfg.const("spawn_gap")
        per_side = self.n_agents // 2
        a = 0
        for side, sgn in ((0, -1.0), (1, 1.0)):
            for k in range(per_side):
                y = 0.0 if per_side == 1 else (2.0 if k == 0 else -2.0)
                self.set_agent(env, a, (sgn * gap / 2.0, y), 0.0 if sgn < 0 else np.pi)
                a += 1

    def _spawn_one(self, env, rng):
        self.ball_pos[env] = (0.0, 0.0, self.r_ball)
        self.ball_vel[env] = 0.0
        self.prev_ball[env] = self.ball_pos[env]
        self.ball_out[env] = False
        self.goal_event[env] = 0

    def _substep_objects(self):
        self._step_ball()

    def _post_physics(self):
        ev = np.repeat(self.goal_event, self.n_agents)
        sign = np.where(self.team == 0, 1.0, -1.0)
        self.scored_signal[:] = np.where(ev != 0, ev * sign, 0.0)
        scored_plus = self.goal_event == 1
        scored_minus = self.goal_event == -1
        self.scores[scored_plus, 0] += 1
        self.scores[scored_minus, 1] += 1
        self.point_latch |= scored_plus | scored_minus

    def _compute_rewards(self):
        ball = np.repeat(self.ball_pos, self.n_agents, axis=0)
        prev_ball = np.repeat(self.prev_ball, self.n_agents, axis=0)
        ball_vel = np.repeat(self.ball_vel, self.n_agents, axis=0)
        w = self.cfg.weights
        bd = rewards.reward_soccer_match(
            self.proxy.root_pos, self.prev_root_pos, ball, prev_ball, ball_vel,
            self.attack_goal, self.scored_signal,
            weights=(w["p2b"], w["b2g"], w["bv2g"], w["point"]))
        self.rewards[:] = np.asarray(bd.total).reshape(self.num_envs, self.n_agents)
        self.reward_terms.update(bd.terms)

    def _write_goal_obs(self):
        g = self._goalv
        m = self.num_envs * self.n_agents
        ball = np.repeat(self.ball_pos, self.n_agents, axis=0)
        ball_vel = np.repeat(self.ball_vel, self.n_agents, axis=0)
        self.to_local_points(ball, out=g[:, 0:3])
        self.to_local_vectors(ball_vel, out=g[:, 3:6])
        g[:, 6:9] = 0.0
        self._goal_post_obs(g, 9, None)
        col = 13
        order = self._teammates_then_opponents()
        for k in range(order.shape[1]):
            self.to_local_points(self.proxy.root_pos[order[:, k]],
                                 out=g[:, col:col + 3])
            col += 3

    def _goal_post_obs(self, g, col, _unused):
        self.to_local_points(self.attack_goal, out=self._scratch_m3)
        g[:, col] = self._scratch_m3[:, 0]
        g[:, col + 1] = self._scratch_m3[:, 1]
        g[:, col + 2] = self.goal_half_w
        g[:, col + 3] = self.goal_h

    def _teammates_then_opponents(self):
        """Row indices of the other agents: allies first, then opponents."""
        m = self.num_envs * self.n_agents
        a = self.n_agents
        base = (np.arange(m) // a) * a
        order = np.empty((m, a - 1), dtype=np.int64)
        for row in range(a):
            sameteam = [o for o in range(a) if o != row and (o < a // 2) == (row < a // 2)]
            oppteam = [o for o in range(a) if (o < a // 2) != (row < a // 2)]
            ordering = sameteam + oppteam
            idx = np.arange(row, m, a)
            for k, o in enumerate(ordering):
                order[idx, k] = base[idx] + o
        return order

    def _summarize(self, env):
        sc = (int(self.scores[env, 0]), int(self.scores[env, 1]))
        return EpisodeSummary(
            sport=self.SPORT, env_index=self.first_index + env,
            episode_index=int(self.episode_index[env]),
            steps=int(self.elapsed_steps[env]),
            reason=TerminationReason(int(self.reason[env])),
            success=sc[0] > sc[1], scores=sc)
