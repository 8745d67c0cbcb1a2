"""Independent scalar reference implementations of every reward kernel.

Written in plain Python math, scalar in, scalar out, term by term from
the reward definitions (falling back to the engine's documented defaults
where a functional form is a design choice). These are the oracle side of
the reward dual-route check: they never import the production kernels.
"""
import math

ALIGN_NORM = 1.5
NO_DRIBBLE = 0.5


def clamp01(x):
    return min(1.0, max(0.0, x))


def dist(a, b):
    return math.sqrt(sum((ai - bi) ** 2 for ai, bi in zip(a, b)))


def ref_high_jump(root, prev_root, goal=(22.0, 6.0, 1.0)):
    r_p = clamp01(dist(prev_root, goal) - dist(root, goal))
    x = root[0]
    total = r_p
    if 19.5 < x < 20.5:
        total += root[2]
    return total


def high_jump_branch(x):
    if x <= 19.5:
        return 0
    if x < 20.5:
        return 1
    return 2


def ref_long_jump(root, prev_root, vel, goal=(30.0, 0.0, 1.0), line_x=20.0):
    r_p = clamp01(dist(prev_root, goal) - dist(root, goal))
    total = r_p + 0.01 * vel[0]
    if root[0] > line_x:
        total += 0.1 * root[2] + 30.0 * (root[0] - line_x)
    return total


def long_jump_branch(x):
    return 0 if x <= 20.0 else 1


def ref_hurdling(root, prev_root, goal=(110.0, 0.0, 1.0)):
    return clamp01(dist(prev_root, goal) - dist(root, goal))


def _land_xy(pos, vel, g=9.81):
    vz = vel[2]
    disc = vz * vz + 2.0 * g * pos[2]
    if disc < 0.0:
        return (pos[0], pos[1])
    t = max((vz + math.sqrt(disc)) / g, 0.0)
    return (pos[0] + vel[0] * t, pos[1] + vel[1] * t)


def ref_golf(ball, prev_ball, ball_vel, club, target, latched):
    r_p = clamp01(dist(prev_ball, target) - dist(ball, target))
    r_c = 1.0 if latched else math.exp(-100.0 * dist(ball, club) ** 2)
    dxy2 = (ball[0] - target[0]) ** 2 + (ball[1] - target[1]) ** 2
    r_g = math.exp(-0.1 * dxy2)
    land = _land_xy(ball, ball_vel)
    r_pred = math.exp(-0.1 * ((land[0] - target[0]) ** 2 + (land[1] - target[1]) ** 2))
    return r_p + r_c + r_g + r_pred


def ref_javelin(t, hand, jav, prev_jav, rot6, default_rot6, root, root_spawn):
    r_grab = math.exp(-dist(hand, jav) ** 2)
    r_js = math.exp(-sum((a - b) ** 2 for a, b in zip(rot6, default_rot6)))
    r_s = math.exp(-dist(root, root_spawn) ** 2)
    r_goal = clamp01(jav[0] - prev_jav[0])
    if t < 0.6:
        return 0.9 * r_grab + 0.1 * r_js
    if t < 1.2:
        return 0.9 * r_goal + 0.05 * r_s - 0.05 * r_grab
    return 0.9 * r_goal + 0.1 * r_js


def javelin_branch(t):
    if t < 0.6:
        return 0
    if t < 1.2:
        return 1
    return 2


def _land_at_height(pos, vel, h, g=9.81):
    vz = vel[2]
    disc = vz * vz - 2.0 * g * (h - pos[2])
    if disc < 0.0:
        return None
    t = (vz + math.sqrt(disc)) / g
    if t < 0.0:
        return None
    return (pos[0] + vel[0] * t, pos[1] + vel[1] * t)


def ref_racket(racket, ball, ball_vel, target, latched, n_hits, sport):
    if not latched:
        return math.exp(-dist(racket, ball) ** 2)
    if sport == "tennis":
        land = _land_xy(ball, ball_vel)
        acc = math.exp(-((land[0] - target[0]) ** 2 + (land[1] - target[1]) ** 2))
        return 1.0 + acc
    land = _land_at_height(ball, ball_vel, 0.76)
    if land is None:
        return 1.0 + 0.0 + n_hits
    acc = math.exp(-((land[0] - target[0]) ** 2 + (land[1] - target[1]) ** 2))
    return 1.0 + acc + n_hits


def ref_combat(root, heading, vel, opp_root, tip, targets, point_flag):
    dx, dy = opp_root[0] - root[0], opp_root[1] - root[1]
    n = math.hypot(dx, dy)
    ux, uy = (dx / n, dy / n) if n > 1e-9 else (0.0, 0.0)
    r_facing = clamp01(heading[0] * ux + heading[1] * uy)
    r_vel = clamp01((vel[0] * ux + vel[1] * uy) / ALIGN_NORM)
    min_d2 = min(sum((tip[i] - tg[i]) ** 2 for i in range(3)) for tg in targets)
    r_strike = math.exp(-10.0 * min_d2)
    r_point = 1.0 if point_flag else 0.0
    return 0.1 * r_facing + 0.1 * r_vel + 0.6 * r_strike + 1.0 * r_point


def ref_penalty_kick(root, prev_root, ball, prev_ball, ball_vel, target, spawn_x):
    closer = dist(prev_ball, target) - dist(ball, target)
    c_nd = NO_DRIBBLE if root[0] > spawn_x else 0.0
    if closer <= 0.0:
        r_p2b = clamp01(dist(prev_root, prev_ball) - dist(root, ball))
        return 0.4 * r_p2b - c_nd
    r_b2g = clamp01(closer)
    dx = [target[i] - ball[i] for i in range(3)]
    n = math.sqrt(sum(d * d for d in dx))
    proj = sum(ball_vel[i] * dx[i] for i in range(3)) / max(n, 1e-9)
    r_bv2g = clamp01(proj / ALIGN_NORM)
    land = _land_xy(ball, ball_vel)
    r_b2t = math.exp(-((land[0] - target[0]) ** 2 + (land[1] - target[1]) ** 2))
    return 0.1 * r_b2g + 0.1 * r_bv2g + 0.8 * r_b2t - c_nd


def penalty_branch(closer):
    return 0 if closer <= 0.0 else 1


def ref_soccer_match(root, prev_root, ball, prev_ball, ball_vel, goal, scored,
                     weights=(0.4, 0.1, 0.1, 100.0)):
    near = dist(root, ball) <= 0.5
    r_p2b = clamp01(dist(prev_root, prev_ball) - dist(root, ball))
    if near:
        r_b2g = clamp01(dist(prev_ball, goal) - dist(ball, goal))
        dx = [goal[i] - ball[i] for i in range(3)]
        n = math.sqrt(sum(d * d for d in dx))
        proj = sum(ball_vel[i] * dx[i] for i in range(3)) / max(n, 1e-9)
        r_bv2g = clamp01(proj / ALIGN_NORM)
    else:
        r_b2g = 0.0
        r_bv2g = 0.0
    w = weights
    return w[0] * r_p2b + w[1] * r_b2g + w[2] * r_bv2g + w[3] * scored


def soccer_gate_branch(d_root_ball):
    return 1 if d_root_ball <= 0.5 else 0


def ref_free_throw(ball, ball_vel, hoop, basket_flag, g=9.81):
    dz = hoop[2] - ball[2]
    t = max(math.sqrt(2.0 * abs(dz) / g), 0.25)
    v_des = [(hoop[0] - ball[0]) / t, (hoop[1] - ball[1]) / t,
             dz / t + 0.5 * g * t]
    dv2 = sum((ball_vel[i] - v_des[i]) ** 2 for i in range(3))
    r_ballvel = math.exp(-0.1 * dv2)
    dx = [hoop[i] - ball[i] for i in range(3)]
    n = math.sqrt(sum(d * d for d in dx))
    proj = sum(ball_vel[i] * dx[i] for i in range(3)) / max(n, 1e-9)
    r_bv2g = clamp01(proj / ALIGN_NORM)
    return 0.5 * r_ballvel + 0.5 * r_bv2g + (1.0 if basket_flag else 0.0)
