"""Pure reward kernels for the eleven sports, with per-term breakdowns.

Every kernel broadcasts over leading batch axes and returns a
:class:`RewardBreakdown` whose total is exactly the weighted sum of its
terms. Piecewise branch selection is encoded in the weights, so the
breakdown stays auditable: term values are always reported, the inactive
branch simply carries weight zero.

Progress ("point-goal") terms are previous-step distance minus current
distance, supplied by the caller; at episode start prev equals current so
the first step scores zero progress.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import ballistics
from .errors import DomainError

# Default goal points for the track events.
HIGH_JUMP_GOAL = np.array([22.0, 6.0, 1.0])
LONG_JUMP_GOAL = np.array([30.0, 0.0, 1.0])
HURDLING_GOAL = np.array([110.0, 0.0, 1.0])

# Exponential falloff constants.
GOLF_CONTACT_FALLOFF = 100.0
GOLF_GOAL_FALLOFF = 0.1
GOLF_PRED_FALLOFF = 0.1
GRAB_FALLOFF = 1.0
RACKET_FALLOFF = 1.0
LAND_FALLOFF = 1.0
STRIKE_FALLOFF = 10.0
BALLVEL_FALLOFF = 0.1

# Alignment terms normalize speed by this before clamping to [0, 1].
ALIGN_SPEED_NORM = 1.5  # m/s

NO_DRIBBLE_PENALTY = 0.5
B2T_FALLOFF = 1.0

COMBAT_WEIGHTS = (0.1, 0.1, 0.6, 1.0)
SOCCER_MATCH_WEIGHTS = (0.4, 0.1, 0.1, 100.0)
SOCCER_BALL_GATE = 0.5  # m

TABLE_HEIGHT = 0.76


@dataclass(frozen=True)
class HighJumpGoal:
    bar_pos: np.ndarray
    goal_pos: np.ndarray


@dataclass(frozen=True)
class LongJumpGoal:
    start_pos: np.ndarray
    line_pos: np.ndarray
    goal_pos: np.ndarray


@dataclass(frozen=True)
class HurdlingGoal:
    hurdle_pos: np.ndarray   # (10, 3)
    finish_pos: np.ndarray


@dataclass(frozen=True)
class GolfGoal:
    ball_pos: np.ndarray
    club_pos: np.ndarray
    goal_pos: np.ndarray
    heightmap: np.ndarray    # (32, 32)


@dataclass(frozen=True)
class JavelinGoal:
    object_state: np.ndarray  # 13-value pose + velocity
    root_pos: np.ndarray
    hand_pos: np.ndarray


@dataclass(frozen=True)
class RacketGoal:
    ball_pos: np.ndarray
    ball_vel: np.ndarray
    racket_pos: np.ndarray
    target_pos: np.ndarray


@dataclass(frozen=True)
class CombatGoal:
    opp_body_pos: np.ndarray      # (J, 3)
    opp_body_vel: np.ndarray      # (J, 3)
    tip_to_target: np.ndarray     # (5, 3)
    self_contact_sq: np.ndarray   # (J,)
    opp_contact_sq: np.ndarray    # (J,)
    bounds: np.ndarray | None     # (4,) for fencing, None for boxing


@dataclass(frozen=True)
class KickGoal:
    ball_pos: np.ndarray
    ball_vel6: np.ndarray
    goal_post: np.ndarray   # (4,)
    goal_target: np.ndarray


@dataclass(frozen=True)
class MatchGoal:
    ball_pos: np.ndarray
    ball_vel6: np.ndarray
    goal_post: np.ndarray
    other_roots: np.ndarray  # (k, 3): allies first, then opponents


SportGoal = (HighJumpGoal | LongJumpGoal | HurdlingGoal | GolfGoal | JavelinGoal
             | RacketGoal | CombatGoal | KickGoal | MatchGoal)


def parse_goal(sport: str, vec: np.ndarray, joint_count: int = 24) -> SportGoal:
    """Decode a flat goal-observation vector into its typed Sport goal."""
    v = np.asarray(vec, dtype=np.float64)
    if sport == "high_jump":
        return HighJumpGoal(v[0:3], v[3:6])
    if sport == "long_jump":
        return LongJumpGoal(v[0:3], v[3:6], v[6:9])
    if sport == "hurdling":
        return HurdlingGoal(v[0:30].reshape(10, 3), v[30:33])
    if sport == "golf":
        return GolfGoal(v[0:3], v[3:6], v[6:9], v[9:].reshape(32, 32))
    if sport == "javelin":
        return JavelinGoal(v[0:13], v[13:16], v[16:19])
    if sport in ("tennis", "table_tennis"):
        return RacketGoal(v[0:3], v[3:6], v[6:9], v[9:12])
    if sport in ("fencing", "boxing"):
        j = joint_count
        base = 6 * j + 15
        bounds = v[base + 2 * j:base + 2 * j + 4] if sport == "fencing" else None
        return CombatGoal(v[0:3 * j].reshape(j, 3), v[3 * j:6 * j].reshape(j, 3),
                          v[6 * j:6 * j + 15].reshape(5, 3),
                          v[base:base + j], v[base + j:base + 2 * j], bounds)
    if sport in ("penalty_kick", "free_throw"):
        return KickGoal(v[0:3], v[3:9], v[9:13], v[13:16])
    if sport in ("soccer_match", "basketball_match"):
        return MatchGoal(v[0:3], v[3:9], v[9:13], v[13:].reshape(-1, 3))
    raise DomainError(f"unknown sport {sport!r}")


@dataclass(frozen=True)
class RewardBreakdown:
    """Per-term reward values, their weights, and the weighted total."""

    terms: Mapping[str, np.ndarray | float]
    weights: Mapping[str, np.ndarray | float]
    total: np.ndarray | float

    @classmethod
    def build(cls, terms: dict, weights: dict) -> "RewardBreakdown":
        total = None
        for name, value in terms.items():
            part = weights[name] * np.asarray(value, dtype=np.float64)
            total = part if total is None else total + part
        if total is not None and np.ndim(total) == 0:
            total = float(total)
        return cls(terms=terms, weights=weights, total=total)

    def check(self, atol: float = 1e-9) -> None:
        recomputed = sum(np.asarray(self.weights[k]) * np.asarray(v)
                         for k, v in self.terms.items())
        if not np.allclose(recomputed, self.total, atol=atol, rtol=0.0):
            raise AssertionError("breakdown total does not match weighted terms")
        for k, v in self.terms.items():
            if not np.all(np.isfinite(v)):
                raise AssertionError(f"non-finite reward term {k}")


def _dist(a, b):
    return np.linalg.norm(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64), axis=-1)


def _progress(prev_pos, cur_pos, goal):
    return _dist(prev_pos, goal) - _dist(cur_pos, goal)


def _clamp01(x):
    return np.clip(x, 0.0, 1.0)


def _align01(vel, from_pos, to_pos):
    """clamp(velocity projected on the unit direction to the target / norm)."""
    d = np.asarray(to_pos, dtype=np.float64) - np.asarray(from_pos, dtype=np.float64)
    n = np.linalg.norm(d, axis=-1)
    proj = np.sum(np.asarray(vel, dtype=np.float64) * d, axis=-1) / np.maximum(n, 1e-9)
    return _clamp01(proj / ALIGN_SPEED_NORM)


# ---------------------------------------------------------------------------
# single-person sports


def reward_high_jump(root_pos, prev_root_pos, goal_pos=HIGH_JUMP_GOAL) -> RewardBreakdown:
    """Progress toward the landing goal, plus root height near the bar plane.

    The height term is active only while the root x is within (19.5, 20.5).
    """
    root_pos = np.asarray(root_pos, dtype=np.float64)
    r_p = _clamp01(_progress(prev_root_pos, root_pos, goal_pos))
    r_h = root_pos[..., 2]
    x = root_pos[..., 0]
    w_h = np.where((x > 19.5) & (x < 20.5), 1.0, 0.0)
    if np.ndim(w_h) == 0:
        w_h = float(w_h)
    return RewardBreakdown.build({"progress": r_p, "height": r_h},
                                 {"progress": 1.0, "height": w_h})


def reward_long_jump(root_pos, prev_root_pos, root_vel,
                     goal_pos=LONG_JUMP_GOAL, line_x: float = 20.0) -> RewardBreakdown:
    """Runway progress + speed; after the jump line, height and jump length."""
    root_pos = np.asarray(root_pos, dtype=np.float64)
    root_vel = np.asarray(root_vel, dtype=np.float64)
    r_p = _clamp01(_progress(prev_root_pos, root_pos, goal_pos))
    r_v = root_vel[..., 0]
    r_h = root_pos[..., 2]
    x = root_pos[..., 0]
    r_l = x - line_x
    past = x > line_x
    w_h = np.where(past, 0.1, 0.0)
    w_l = np.where(past, 30.0, 0.0)
    if np.ndim(x) == 0:
        w_h, w_l = float(w_h), float(w_l)
    return RewardBreakdown.build(
        {"progress": r_p, "velocity": r_v, "height": r_h, "length": r_l},
        {"progress": 1.0, "velocity": 0.01, "height": w_h, "length": w_l})


def reward_hurdling(root_pos, prev_root_pos, goal_pos=HURDLING_GOAL) -> RewardBreakdown:
    """Clamped progress toward the finish line."""
    r_d = _clamp01(_progress(prev_root_pos, root_pos, goal_pos))
    return RewardBreakdown.build({"distance": r_d}, {"distance": 1.0})


def reward_golf(ball_pos, prev_ball_pos, ball_vel, club_pos, target_pos,
                contact_latched, gravity: float = ballistics.GRAVITY,
                literal_pred: bool = False) -> RewardBreakdown:
    """Ball progress, club-contact shaping, goal proximity, landing prediction.

    ``literal_pred`` switches the prediction term to score the predicted
    landing point against the ball's own x-y instead of the goal.
    """
    ball_pos = np.asarray(ball_pos, dtype=np.float64)
    target_pos = np.asarray(target_pos, dtype=np.float64)
    contact_latched = np.asarray(contact_latched, dtype=bool)
    r_p = _clamp01(_progress(prev_ball_pos, ball_pos, target_pos))
    d_cb = _dist(ball_pos, club_pos)
    r_c = np.where(contact_latched, 1.0, np.exp(-GOLF_CONTACT_FALLOFF * d_cb ** 2))
    d_xy = _dist(ball_pos[..., :2], target_pos[..., :2])
    r_g = np.exp(-GOLF_GOAL_FALLOFF * d_xy ** 2)
    land = ballistics.land_ground_xy(ball_pos, ball_vel, gravity)
    ref = ball_pos[..., :2] if literal_pred else target_pos[..., :2]
    r_pred = np.exp(-GOLF_PRED_FALLOFF * np.sum((land - ref) ** 2, axis=-1))
    if np.ndim(r_p) == 0:
        r_c, r_g, r_pred = float(r_c), float(r_g), float(r_pred)
    return RewardBreakdown.build(
        {"progress": r_p, "contact": r_c, "goal": r_g, "prediction": r_pred},
        {"progress": 1.0, "contact": 1.0, "goal": 1.0, "prediction": 1.0})


def reward_javelin(t, hand_pos, obj_pos, prev_obj_pos, obj_rot6, default_rot6,
                   root_pos, root_spawn_pos) -> RewardBreakdown:
    """Three-stage kernel: hold (t<0.6 s), throw (0.6-1.2 s), flight (>=1.2 s).

    The grab term enters the throw stage with a negative weight so the hand
    is pushed off the javelin.
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise DomainError("stage timer must be non-negative")
    r_grab = np.exp(-GRAB_FALLOFF * _dist(hand_pos, obj_pos) ** 2)
    rot_diff = np.sum((np.asarray(obj_rot6, dtype=np.float64)
                       - np.asarray(default_rot6, dtype=np.float64)) ** 2, axis=-1)
    r_js = np.exp(-GRAB_FALLOFF * rot_diff)
    r_s = np.exp(-GRAB_FALLOFF * _dist(root_pos, root_spawn_pos) ** 2)
    obj_pos = np.asarray(obj_pos, dtype=np.float64)
    prev_obj_pos = np.asarray(prev_obj_pos, dtype=np.float64)
    r_goal = _clamp01(obj_pos[..., 0] - prev_obj_pos[..., 0])
    hold = t < 0.6
    throw = (t >= 0.6) & (t < 1.2)
    fly = t >= 1.2
    w_grab = np.where(hold, 0.9, np.where(throw, -0.05, 0.0))
    w_js = np.where(hold, 0.1, np.where(fly, 0.1, 0.0))
    w_goal = np.where(hold, 0.0, 0.9)
    w_s = np.where(throw, 0.05, 0.0)
    if np.ndim(t) == 0:
        w_grab, w_js, w_goal, w_s = map(float, (w_grab, w_js, w_goal, w_s))
    return RewardBreakdown.build(
        {"grab": r_grab, "stability": r_js, "goal": r_goal, "root_hold": r_s},
        {"grab": w_grab, "stability": w_js, "goal": w_goal, "root_hold": w_s})


# ---------------------------------------------------------------------------
# racket sports


def reward_racket_sport(racket_pos, ball_pos, ball_vel, target_pos,
                        contact_latched, n_hits, sport: str,
                        gravity: float = ballistics.GRAVITY) -> RewardBreakdown:
    """Racket-to-ball shaping before contact; landing accuracy after.

    Tennis predicts the landing on the ground plane; table tennis on the
    table plane (0.76 m) and adds the running hit count. An unreachable
    table plane zeroes the landing term (ball cannot land on the table).
    """
    if sport not in ("tennis", "table_tennis"):
        raise DomainError(f"not a racket sport: {sport!r}")
    contact_latched = np.asarray(contact_latched, dtype=bool)
    r_racket = np.exp(-RACKET_FALLOFF * _dist(racket_pos, ball_pos) ** 2)
    ball_pos = np.asarray(ball_pos, dtype=np.float64)
    target_pos = np.asarray(target_pos, dtype=np.float64)
    if sport == "tennis":
        land = ballistics.land_ground_xy(ball_pos, ball_vel, gravity)
        acc = np.exp(-LAND_FALLOFF * np.sum((land - target_pos[..., :2]) ** 2, axis=-1))
        r_ball = 1.0 + acc
    else:
        land, valid = ballistics.land_height_xy(ball_pos, ball_vel, TABLE_HEIGHT, gravity)
        diff = np.where(valid[..., None], land - target_pos[..., :2], 0.0)
        acc = np.where(valid, np.exp(-LAND_FALLOFF * np.sum(diff ** 2, axis=-1)), 0.0)
        r_ball = 1.0 + acc + np.asarray(n_hits, dtype=np.float64)
    w_racket = np.where(contact_latched, 0.0, 1.0)
    w_ball = np.where(contact_latched, 1.0, 0.0)
    if np.ndim(r_racket) == 0:
        w_racket, w_ball = float(w_racket), float(w_ball)
        r_ball = float(r_ball)
    return RewardBreakdown.build({"racket": r_racket, "ball": r_ball},
                                 {"racket": w_racket, "ball": w_ball})


# ---------------------------------------------------------------------------
# combat sports


def reward_combat(root_pos, heading_dir, root_vel, opp_root_pos,
                  tip_pos, opp_target_pos, point_flag) -> RewardBreakdown:
    """Facing/closing shaping, strike proximity, and the scored-point bonus.

    ``tip_pos`` is the sword tip (fencing) or striking hand (boxing);
    ``opp_target_pos`` stacks the five target bodies in its second-to-last
    axis (pelvis, head, spine, chest, torso).
    """
    root_pos = np.asarray(root_pos, dtype=np.float64)
    opp_root_pos = np.asarray(opp_root_pos, dtype=np.float64)
    heading_dir = np.asarray(heading_dir, dtype=np.float64)
    to_opp = opp_root_pos[..., :2] - root_pos[..., :2]
    n = np.linalg.norm(to_opp, axis=-1)
    unit = to_opp / np.maximum(n, 1e-9)[..., None]
    r_facing = _clamp01(np.sum(heading_dir * unit, axis=-1))
    root_vel = np.asarray(root_vel, dtype=np.float64)
    r_vel = _clamp01(np.sum(root_vel[..., :2] * unit, axis=-1) / ALIGN_SPEED_NORM)
    d2 = np.sum((np.asarray(tip_pos, dtype=np.float64)[..., None, :]
                 - np.asarray(opp_target_pos, dtype=np.float64)) ** 2, axis=-1)
    r_strike = np.exp(-STRIKE_FALLOFF * np.min(d2, axis=-1))
    r_point = np.asarray(point_flag, dtype=np.float64)
    if np.ndim(r_facing) == 0:
        r_facing, r_vel, r_strike, r_point = map(float, (r_facing, r_vel, r_strike, r_point))
    wf, wv, ws, wp = COMBAT_WEIGHTS
    return RewardBreakdown.build(
        {"facing": r_facing, "velocity": r_vel, "strike": r_strike, "point": r_point},
        {"facing": wf, "velocity": wv, "strike": ws, "point": wp})


# ---------------------------------------------------------------------------
# soccer


def reward_penalty_kick(root_pos, prev_root_pos, ball_pos, prev_ball_pos,
                        ball_vel, target_pos, ball_spawn_x,
                        gravity: float = ballistics.GRAVITY,
                        no_dribble_penalty: float = NO_DRIBBLE_PENALTY) -> RewardBreakdown:
    """Two-regime kick shaping gated on whether the ball moves toward the goal.

    While the ball is not closing on the target the agent is paid to approach
    the ball; once it closes, ball progress, velocity alignment, and the
    predicted-landing term take over. Crossing the ball's spawn x costs the
    no-dribble penalty in both regimes.
    """
    root_pos = np.asarray(root_pos, dtype=np.float64)
    ball_pos = np.asarray(ball_pos, dtype=np.float64)
    target_pos = np.asarray(target_pos, dtype=np.float64)
    closer = _progress(prev_ball_pos, ball_pos, target_pos)
    r_p2b = _clamp01(_dist(prev_root_pos, prev_ball_pos) - _dist(root_pos, ball_pos))
    r_b2g = _clamp01(closer)
    r_bv2g = _align01(ball_vel, ball_pos, target_pos)
    land = ballistics.land_ground_xy(ball_pos, ball_vel, gravity)
    r_b2t = np.exp(-B2T_FALLOFF * np.sum((land - target_pos[..., :2]) ** 2, axis=-1))
    dribbling = root_pos[..., 0] > np.asarray(ball_spawn_x, dtype=np.float64)
    c_nd = np.where(dribbling, 1.0, 0.0)
    kick = closer > 0.0
    w_p2b = np.where(kick, 0.0, 0.4)
    w_b2g = np.where(kick, 0.1, 0.0)
    w_bv2g = np.where(kick, 0.1, 0.0)
    w_b2t = np.where(kick, 0.8, 0.0)
    if np.ndim(closer) == 0:
        w_p2b, w_b2g, w_bv2g, w_b2t = map(float, (w_p2b, w_b2g, w_bv2g, w_b2t))
        c_nd = float(c_nd)
    return RewardBreakdown.build(
        {"p2b": r_p2b, "b2g": r_b2g, "bv2g": r_bv2g, "b2t": r_b2t, "no_dribble": c_nd},
        {"p2b": w_p2b, "b2g": w_b2g, "bv2g": w_bv2g, "b2t": w_b2t,
         "no_dribble": -no_dribble_penalty})


def reward_soccer_match(root_pos, prev_root_pos, ball_pos, prev_ball_pos,
                        ball_vel, goal_target, scored,
                        weights=SOCCER_MATCH_WEIGHTS) -> RewardBreakdown:
    """Team-play kernel: ball shaping gated on proximity, plus goal events.

    ``scored`` is the one-time point event for this agent's side: +1, -1, or
    0. The b2g/bv2g terms are zeroed whenever the agent is farther than
    0.5 m from the ball.
    """
    root_pos = np.asarray(root_pos, dtype=np.float64)
    ball_pos = np.asarray(ball_pos, dtype=np.float64)
    near = _dist(root_pos, ball_pos) <= SOCCER_BALL_GATE
    r_p2b = _clamp01(_dist(prev_root_pos, prev_ball_pos) - _dist(root_pos, ball_pos))
    r_b2g = np.where(near, _clamp01(_progress(prev_ball_pos, ball_pos, goal_target)), 0.0)
    r_bv2g = np.where(near, _align01(ball_vel, ball_pos, goal_target), 0.0)
    r_point = np.asarray(scored, dtype=np.float64)
    if np.ndim(r_p2b) == 0:
        r_b2g, r_bv2g, r_point = float(r_b2g), float(r_bv2g), float(r_point)
    w_p2b, w_b2g, w_bv2g, w_point = weights
    return RewardBreakdown.build(
        {"p2b": r_p2b, "b2g": r_b2g, "bv2g": r_bv2g, "point": r_point},
        {"p2b": w_p2b, "b2g": w_b2g, "bv2g": w_bv2g, "point": w_point})


# ---------------------------------------------------------------------------
# basketball


def reward_free_throw(ball_pos, ball_vel, hoop_target, basket_flag,
                      gravity: float = ballistics.GRAVITY,
                      literal_vz: bool = False) -> RewardBreakdown:
    """Desired-velocity tracking toward the hoop plus the one-time basket bonus."""
    ball_pos = np.asarray(ball_pos, dtype=np.float64)
    hoop_target = np.asarray(hoop_target, dtype=np.float64)
    v_des = ballistics.desired_throw_velocity_xy(ball_pos, hoop_target, gravity,
                                                 literal_vz=literal_vz)
    if np.any(~np.isfinite(v_des)):
        raise DomainError("ball coincides with the hoop target")
    dv2 = np.sum((np.asarray(ball_vel, dtype=np.float64) - v_des) ** 2, axis=-1)
    r_ballvel = np.exp(-BALLVEL_FALLOFF * dv2)
    r_bv2g = _align01(ball_vel, ball_pos, hoop_target)
    r_basket = np.asarray(basket_flag, dtype=np.float64)
    if np.ndim(r_ballvel) == 0:
        r_ballvel, r_bv2g, r_basket = map(float, (r_ballvel, r_bv2g, r_basket))
    return RewardBreakdown.build(
        {"ballvel": r_ballvel, "bv2g": r_bv2g, "basket": r_basket},
        {"ballvel": 0.5, "bv2g": 0.5, "basket": 1.0})
