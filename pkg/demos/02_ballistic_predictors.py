"""Ballistic predictors: the closed forms behind the dense rewards.

Golf, tennis, and soccer rewards score the *predicted* landing point of a
ball in flight; the basketball free throw scores how close the ball's
velocity is to the velocity that would carry it through the hoop. This
script exercises each predictor and checks them against brute-force
integration.
"""
import numpy as np

from sportsim.ballistics import (LaunchState, desired_throw_velocity,
                                 integrate_flight, predict_land_ground,
                                 predict_land_height)

# 1. where will a driven golf ball land on flat ground?
launch = LaunchState(p0=[0.0, 0.0, 0.02], v0=[22.0, 3.0, 14.0])
land = predict_land_ground(launch)
print(f"golf ball lands at ({land[0]:.2f}, {land[1]:.2f}) m")

# sanity: integrate the same flight numerically to its z=0 crossing
samples = integrate_flight(launch, dt=1e-4, steps=40_000)
below = np.argmax((samples[:, 2] <= 0.0) & (samples[:, 5] <= 0.0))
print(f"numeric integration crosses the ground near "
      f"({samples[below, 0]:.2f}, {samples[below, 1]:.2f}) m")

# 2. table tennis: the landing plane is the table top at 0.76 m,
#    and a descending crossing is what counts as landing
serve = LaunchState(p0=[1.2, 0.1, 1.1], v0=[-4.5, -0.3, 1.0])
on_table = predict_land_height(serve, 0.76)
print(f"serve lands on the table plane at ({on_table[0]:.3f}, {on_table[1]:.3f}) m")

# 3. free throw: the velocity that carries the ball into the hoop
ball = np.array([0.0, 0.0, 2.0])
hoop = np.array([4.5, 0.0, 3.0])
v = desired_throw_velocity(ball, hoop)
t = np.sqrt(2.0 * abs(hoop[2] - ball[2]) / 9.81)
print(f"\nfree-throw solution: |v_xy| = {np.hypot(v[0], v[1]):.3f} m/s, "
      f"v_z = {v[2]:.3f} m/s, flight time = {t:.4f} s")
flight = integrate_flight(LaunchState(p0=ball, v0=v), t / 500, 500)
print(f"integrated end point: {flight[-1, :3].round(4)} (hoop at {hoop})")
