"""Environment cards: generated human-readable interface contracts.

A card fixes a sport's observation layout, action dimension, reward terms,
termination rule order, and arena constants, so external trainers can bind
to the environment without reading engine code.
"""
from __future__ import annotations

from ..core import get_skeleton
from ..physics import AUX_JOINT, LOCO_JOINT, MARKER_NAMES
from .base import TerminationReason
from .config import SportConfig, default_config

GOAL_LAYOUTS = {
    "high_jump": (("bar_pos", 3), ("goal_pos", 3)),
    "long_jump": (("start_pos", 3), ("line_pos", 3), ("goal_pos", 3)),
    "hurdling": (("hurdle_pos", 30), ("finish_pos", 3)),
    "golf": (("ball_pos", 3), ("club_pos", 3), ("goal_pos", 3), ("heightmap_32x32", 1024)),
    "javelin": (("object_pose_vel", 13), ("root_pos", 3), ("right_hand_pos", 3)),
    "tennis": (("ball_pos", 3), ("ball_vel", 3), ("racket_pos", 3), ("target_pos", 3)),
    "table_tennis": (("ball_pos", 3), ("ball_vel", 3), ("racket_pos", 3), ("target_pos", 3)),
    "fencing": (("opp_body_pos", 72), ("opp_body_vel", 72), ("tip_to_target", 15),
                ("self_contact_sq", 24), ("opp_contact_sq", 24), ("bounds", 4)),
    "boxing": (("opp_body_pos", 72), ("opp_body_vel", 72), ("hand_to_target", 15),
               ("self_contact_sq", 24), ("opp_contact_sq", 24)),
    "penalty_kick": (("ball_pos", 3), ("ball_vel6", 6), ("goal_post", 4), ("goal_target", 3)),
    "soccer_match": (("ball_pos", 3), ("ball_vel6", 6), ("goal_post", 4), ("other_roots", None)),
    "free_throw": (("ball_pos", 3), ("ball_vel6", 6), ("hoop_box", 4), ("hoop_target", 3)),
    "basketball_match": (("ball_pos", 3), ("ball_vel6", 6), ("hoop_box", 4), ("other_roots", None)),
}

REWARD_TERMS = {
    "high_jump": "1 x progress + (1 if 19.5 < x < 20.5 else 0) x height",
    "long_jump": "1 x progress + 0.01 x velocity (+ 0.1 x height + 30 x length past 20 m)",
    "hurdling": "1 x distance (clamped progress to the finish)",
    "golf": "1 x progress + 1 x contact + 1 x goal + 1 x prediction",
    "javelin": "staged: 0.9 grab + 0.1 stability | 0.9 goal + 0.05 root_hold - 0.05 grab | 0.9 goal + 0.1 stability",
    "tennis": "pre-contact: racket proximity; post: 1 + landing accuracy",
    "table_tennis": "pre-contact: racket proximity; post: 1 + landing accuracy + hit count",
    "fencing": "0.1 facing + 0.1 velocity + 0.6 strike + 1 point",
    "boxing": "0.1 facing + 0.1 velocity + 0.6 strike + 1 point",
    "penalty_kick": "gated: 0.4 p2b | 0.1 b2g + 0.1 bv2g + 0.8 b2t, minus no-dribble",
    "soccer_match": "0.4 p2b + 0.1 b2g + 0.1 bv2g + 100 point (b2g/bv2g gated at 0.5 m)",
    "free_throw": "0.5 ballvel + 0.5 bv2g + 1 basket",
    "basketball_match": "0.4 p2b + 0.1 b2g + 0.1 bv2g + 100 point (gated at 0.5 m)",
}


def render_card(sport: str, cfg: SportConfig | None = None) -> str:
    from . import ENV_CLASSES  # local import to avoid a cycle

    cfg = cfg or default_config(sport)
    skel = get_skeleton(cfg.skeleton)
    cls = ENV_CLASSES[sport]
    env = cls(cfg, num_envs=1)
    lines = [
        f"environment card: {sport}",
        "=" * (19 + len(sport)),
        "",
        f"skeleton:        {skel.name} ({skel.joint_count} joints, "
        f"{skel.actuated_count} actuated)",
        f"agents per env:  {cfg.n_agents}",
        f"action dim:      {skel.action_dim} (3 target signals per actuated joint)",
        f"observation dim: {env.obs_dim} = proprioception {env.proprio_dim} "
        f"+ goal state {env.GOAL_DIM}",
        f"control rate:    30 Hz policy, 60 Hz physics (2 substeps/step)",
        f"time limit:      {cfg.time_limit:g} s",
        f"config hash:     {cfg.hash()}",
        "",
        "proprioception layout (heading-normalized):",
        f"  [0:{skel.joint_count * 6}]  joint 6-DoF rotations",
        f"  [{skel.joint_count * 6}:{skel.joint_count * 9}]  joint positions",
        f"  [{skel.joint_count * 9}:{skel.joint_count * 12}]  joint angular velocities",
        f"  [{skel.joint_count * 12}:{skel.joint_count * 15}]  joint linear velocities",
        "",
        "goal-state layout (heading-normalized):",
    ]
    col = env.proprio_dim
    for name, width in GOAL_LAYOUTS[sport]:
        if width is None:
            width = env.obs_dim - col
        lines.append(f"  [{col}:{col + width}]  {name}")
        col += width
    lines += [
        "",
        "action channel map (proxy backend):",
        f"  {LOCO_JOINT} triple   -> planar velocity command (x, y) + yaw rate",
        f"  {AUX_JOINT} triple   -> jump (>0.5), stand-height delta, grip (<0 releases)",
        f"  {', '.join(MARKER_NAMES)} triples -> marker offset targets (m)",
        "  all other channels are accepted and ignored",
        "",
        f"reward: {REWARD_TERMS[sport]}",
        "",
        "termination rule order (first match wins):",
        "  1. simulation_fault",
    ]
    for i, (reason, _) in enumerate(cls.RULES, start=2):
        lines.append(f"  {i}. {TerminationReason(reason).name.lower()}")
    lines.append(f"  {len(cls.RULES) + 2}. time_limit")
    lines += ["", "constants:"]
    for key in sorted(cfg.consts):
        lines.append(f"  {key} = {cfg.consts[key]:g}")
    if cfg.weights:
        lines.append("")
        lines.append("weight overrides: " + ", ".join(
            f"{k}={v:g}" for k, v in sorted(cfg.weights.items())))
    if cfg.curriculum.mode != "off":
        c = cfg.curriculum
        desc = (f"ladder {list(c.levels)}" if c.mode == "ladder"
                else f"uniform [{c.low:g}, {c.high:g}]")
        lines.append(f"curriculum: {desc}")
    return "\n".join(lines) + "\n"
