"""Reward kernels return per-term breakdowns, not just a scalar.

Each sport's reward is a weighted sum of named terms; piecewise structure
shows up as weights switching on and off. The breakdown makes the piecewise
logic auditable step by step.
"""
import numpy as np

from sportsim import rewards as rw


def show(tag, bd):
    terms = {k: float(np.asarray(v)) for k, v in bd.terms.items()}
    weights = {k: float(np.asarray(bd.weights[k])) for k in bd.terms}
    print(f"\n{tag}")
    for name in terms:
        print(f"  {name:>10s}: value {terms[name]:+8.4f}  x weight {weights[name]:+7.2f}"
              f"  -> {terms[name] * weights[name]:+8.4f}")
    print(f"  {'total':>10s}: {float(np.asarray(bd.total)):+8.4f}")


# high jump: the height term only pays inside the bar window (19.5, 20.5)
before_bar = np.array([12.0, 3.6, 0.95])
show("high jump, on the runway (x = 12)",
     rw.reward_high_jump(before_bar, before_bar - [0.2, 0.06, 0.0]))
over_bar = np.array([20.0, 6.0, 2.31])
show("high jump, over the bar (x = 20)",
     rw.reward_high_jump(over_bar, over_bar - [0.15, 0.0, 0.1]))

# javelin: three stages keyed on the episode timer
jav = np.array([0.35, -0.3, 1.4])
d6 = np.array([1.0, 0, 0, 0, 1.0, 0])
for t in (0.3, 0.9, 1.5):
    show(f"javelin at t = {t:.1f} s",
         rw.reward_javelin(t, jav, jav, jav - [0.02, 0, 0], d6, d6,
                           np.array([0.0, 0.0, 0.93]), np.array([0.0, 0.0, 0.93])))

# penalty kick: approach regime vs kick regime, gated on ball progress
root = np.array([3.4, 0.1, 0.93])
ball = np.array([4.0, 0.0, 0.06])
target = np.array([16.0, 0.8, 1.2])
show("penalty kick, ball not yet moving toward the goal",
     rw.reward_penalty_kick(root, root - [0.25, 0, 0], ball, ball,
                            np.zeros(3), target, 4.0))
moving = ball + np.array([0.5, 0.02, 0.0])
show("penalty kick, ball closing on the goal",
     rw.reward_penalty_kick(root, root, moving, ball,
                            np.array([14.0, 0.8, 3.5]), target, 4.0))
