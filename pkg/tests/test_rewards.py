"""Reward kernels: worked examples, breakdown invariants, symmetries."""
import numpy as np
import pytest

from sportsim import rewards as rw

import reference_rewards as ref


def total(bd):
    return np.asarray(bd.total, dtype=np.float64)


class TestHighJump:
    def test_progress_only_before_bar(self):
        # prev at distance 12.2 from the goal, current at 11.5, x ~ 10
        goal = np.array([22.0, 6.0, 1.0])
        prev = goal - np.array([12.2, 0, 0])
        cur = goal - np.array([11.5, 0, 0])
        bd = rw.reward_high_jump(cur, prev, goal)
        assert bd.total == pytest.approx(0.7, abs=1e-12)
        bd.check()

    def test_stationary_scores_zero(self):
        pos = np.array([5.0, 1.0, 0.9])
        bd = rw.reward_high_jump(pos, pos)
        assert bd.total == 0.0

    def test_height_term_inside_window(self):
        pos = np.array([20.0, 6.0, 1.8])
        bd = rw.reward_high_jump(pos, pos)
        assert bd.total == pytest.approx(1.8)
        assert bd.weights["height"] == 1.0

    def test_progress_clamped(self):
        goal = np.array([22.0, 6.0, 1.0])
        prev = goal - np.array([10.0, 0, 0])
        cur = goal - np.array([2.0, 0, 0])  # 8 m teleport
        bd = rw.reward_high_jump(cur, prev, goal)
        assert bd.terms["progress"] == pytest.approx(1.0)


class TestLongJump:
    def test_past_line_hand_value(self):
        pos = np.array([21.5, 0.0, 1.2])
        bd = rw.reward_long_jump(pos, pos, np.zeros(3))
        assert bd.total == pytest.approx(0.12 + 45.0, abs=1e-12)

    def test_runway_hand_value(self):
        goal = np.array([30.0, 0.0, 1.0])
        prev = goal - np.array([25.27, 0, 0])
        cur = goal - np.array([25.0, 0, 0])
        bd = rw.reward_long_jump(cur, prev, np.array([8.0, 0, 0]))
        assert bd.total == pytest.approx(0.27 + 0.08, abs=1e-12)

    def test_weights_exposed(self):
        pos = np.array([25.0, 0.0, 1.0])
        bd = rw.reward_long_jump(pos, pos, np.zeros(3))
        assert bd.weights["progress"] == 1.0
        assert bd.weights["velocity"] == 0.01
        assert bd.weights["height"] == 0.1
        assert bd.weights["length"] == 30.0


class TestHurdling:
    def test_examples(self):
        goal = np.array([110.0, 0.0, 1.0])
        pos = np.array([40.0, 0.0, 1.0])  # on the goal line: progress = dx
        assert rw.reward_hurdling(pos, pos).total == 0.0
        prev = pos - np.array([0.4, 0, 0])
        assert rw.reward_hurdling(pos, prev, goal).total == pytest.approx(0.4, abs=1e-12)
        prev = pos - np.array([3.0, 0, 0])
        assert rw.reward_hurdling(pos, prev, goal).total == pytest.approx(1.0)


class TestGolf:
    def test_all_exp_terms_at_unity(self):
        tgt = np.array([10.0, 0.0, 0.0])
        ball = tgt.copy()
        bd = rw.reward_golf(ball, ball, np.zeros(3), club_pos=ball, target_pos=tgt,
                            contact_latched=True)
        assert bd.terms["contact"] == 1.0
        assert bd.terms["goal"] == pytest.approx(1.0)
        assert bd.terms["prediction"] == pytest.approx(1.0)
        assert bd.total == pytest.approx(3.0)

    def test_precontact_club_falloff(self):
        ball = np.array([0.5, 0.0, 0.1])
        club = ball + np.array([0.1, 0.0, 0.0])
        bd = rw.reward_golf(ball, ball, np.zeros(3), club, np.array([10.0, 0, 0]),
                            contact_latched=False)
        assert bd.terms["contact"] == pytest.approx(np.exp(-1.0), rel=1e-12)

    def test_literal_pred_variant(self):
        ball = np.array([2.0, 0.0, 0.5])
        vel = np.array([4.0, 0.0, 2.0])
        tgt = np.array([15.0, 0.0, 0.0])
        lit = rw.reward_golf(ball, ball, vel, ball, tgt, False, literal_pred=True)
        std = rw.reward_golf(ball, ball, vel, ball, tgt, False, literal_pred=False)
        assert lit.terms["prediction"] != std.terms["prediction"]

    def test_matches_reference(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            ball = rng.uniform(-3, 3, 3) + (0, 0, 3)
            prev = ball + rng.uniform(-0.3, 0.3, 3)
            vel = rng.uniform(-8, 8, 3)
            club = ball + rng.uniform(-0.5, 0.5, 3)
            tgt = rng.uniform(-10, 10, 3) * (1, 1, 0)
            latched = rng.random() < 0.5
            got = rw.reward_golf(ball, prev, vel, club, tgt, latched).total
            want = ref.ref_golf(ball, prev, vel, club, tgt, latched)
            assert got == pytest.approx(want, abs=1e-9)


class TestJavelin:
    DEFAULT6 = np.array([1.0, 0, 0, 0, 1.0, 0])

    def kernel(self, t, hand, jav, prev_jav=None, rot=None):
        prev_jav = jav if prev_jav is None else prev_jav
        rot = self.DEFAULT6 if rot is None else rot
        return rw.reward_javelin(t, hand, jav, prev_jav, rot, self.DEFAULT6,
                                 np.zeros(3), np.zeros(3))

    def test_hold_stage_perfect(self):
        jav = np.array([0.3, -0.3, 1.3])
        bd = self.kernel(0.3, jav, jav)
        assert bd.total == pytest.approx(1.0)

    def test_throw_stage_grab_weight_negative(self):
        jav = np.array([0.3, -0.3, 1.3])
        bd = self.kernel(0.9, jav, jav)
        assert bd.weights["grab"] == pytest.approx(-0.05)

    def test_flight_stage_hand_value(self):
        jav = np.array([5.0, 0.0, 3.0])
        hand = jav + np.array([1.0, 0, 0])
        bd = self.kernel(1.5, hand, jav)
        # 0.9 * r_goal(=0, stationary) + 0.1 * r_js(=1)
        assert bd.total == pytest.approx(0.1)

    def test_negative_time_rejected(self):
        with pytest.raises(Exception):
            self.kernel(-0.1, np.zeros(3), np.zeros(3))


class TestRacket:
    def test_precontact_touching(self):
        p = np.array([1.0, 2.0, 1.1])
        bd = rw.reward_racket_sport(p, p, np.zeros(3), np.zeros(3), False, 0, "tennis")
        assert bd.total == pytest.approx(1.0)

    def test_table_tennis_hand_value(self):
        # landing exactly at the target with three prior hits -> 1 + 1 + 3
        ball = np.array([0.0, 0.0, 1.0])
        vel = np.array([1.0, 0.0, 0.0])
        t = (vel[2] + np.sqrt(vel[2] ** 2 + 2 * 9.81 * (1.0 - 0.76))) / 9.81
        target = np.array([vel[0] * t, 0.0, 0.76])
        bd = rw.reward_racket_sport(np.zeros(3), ball, vel, target, True, 3,
                                    "table_tennis")
        assert bd.total == pytest.approx(5.0, abs=1e-9)

    def test_tennis_two_meters_off(self):
        ball = np.array([0.0, 0.0, 0.0])
        vel = np.zeros(3)
        target = np.array([2.0, 0.0, 0.0])
        bd = rw.reward_racket_sport(np.zeros(3), ball, vel, target, True, 0, "tennis")
        assert bd.total == pytest.approx(1.0 + np.exp(-4.0), rel=1e-12)

    def test_unreachable_table_fallback(self):
        ball = np.array([0.0, 0.0, 0.5])  # below the table plane, falling
        vel = np.array([1.0, 0.0, -1.0])
        bd = rw.reward_racket_sport(np.zeros(3), ball, vel, np.zeros(3), True, 2,
                                    "table_tennis")
        assert bd.total == pytest.approx(3.0)  # 1 + 0 + N_hit


class TestCombat:
    def test_point_scored_floor(self):
        tip = np.array([0.0, 0.0, 1.0])
        targets = np.tile(tip, (5, 1))
        bd = rw.reward_combat(np.zeros(3), np.array([1.0, 0.0]), np.zeros(3),
                              np.array([1.0, 0.0, 0.9]), tip, targets, True)
        assert bd.terms["strike"] == pytest.approx(1.0)
        assert bd.total >= 1.6

    def test_hand_value_mid_lunge(self):
        root = np.zeros(3)
        opp = np.array([3.0, 0.0, 0.9])
        tip = np.array([0.5, 0.0, 1.0])
        targets = tip + np.array([[1.0, 0, 0]] * 5)
        bd = rw.reward_combat(root, np.array([1.0, 0.0]), np.array([2.0, 0.0, 0.0]),
                              opp, tip, targets, False)
        assert bd.total == pytest.approx(0.1 + 0.1 + 0.6 * np.exp(-10.0), rel=1e-12)

    def test_point_flag_false(self):
        bd = rw.reward_combat(np.zeros(3), np.array([1.0, 0.0]), np.zeros(3),
                              np.array([2.0, 0, 0.9]), np.array([1.0, 0, 1]),
                              np.ones((5, 3)), False)
        assert bd.terms["point"] == 0.0


class TestPenaltyKick:
    def test_approach_branch_hand_value(self):
        ball = np.array([4.0, 0.0, 0.06])
        root_prev = np.array([3.0, 0.0, 0.9])
        root = np.array([3.3, 0.0, 0.9])
        d_prev = np.linalg.norm(root_prev - ball)
        d_cur = np.linalg.norm(root - ball)
        bd = rw.reward_penalty_kick(root, root_prev, ball, ball, np.zeros(3),
                                    np.array([16.0, 0, 1.0]), 4.0)
        assert bd.total == pytest.approx(0.4 * (d_prev - d_cur), abs=1e-12)

    def test_kick_branch_perfect_prediction(self):
        tgt = np.array([16.0, 0.0, 0.0])
        vel = np.array([8.0, 0.0, 2.0])
        ball = np.array([6.0, 0.0, 0.06])
        t = (vel[2] + np.sqrt(vel[2] ** 2 + 2 * 9.81 * ball[2])) / 9.81
        tgt_xy = ball[:2] + vel[:2] * t
        tgt = np.array([tgt_xy[0], tgt_xy[1], 0.0])
        prev_ball = ball - np.array([0.3, 0, 0])
        root = np.array([3.0, 0.0, 0.9])
        bd = rw.reward_penalty_kick(root, root, ball, prev_ball, vel, tgt, 4.0)
        assert bd.terms["b2t"] == pytest.approx(1.0, abs=1e-12)
        assert bd.weights["b2t"] == 0.8

    def test_no_dribble_active(self):
        ball = np.array([4.0, 0.0, 0.06])
        root = np.array([4.5, 0.0, 0.9])
        bd = rw.reward_penalty_kick(root, root, ball, ball, np.zeros(3),
                                    np.array([16.0, 0, 1.0]), 4.0)
        assert bd.terms["no_dribble"] == 1.0
        assert bd.total == pytest.approx(-0.5)


class TestSoccerMatch:
    def test_gate_zeroes_ball_terms(self):
        root = np.array([0.0, 0.0, 0.9])
        ball = np.array([2.0, 0.0, 0.06])
        prev_ball = ball - np.array([0.5, 0, 0])
        bd = rw.reward_soccer_match(root, root, ball, prev_ball,
                                    np.array([5.0, 0, 0]), np.array([16.0, 0, 0]), 0.0)
        assert bd.terms["b2g"] == 0.0
        assert bd.terms["bv2g"] == 0.0

    def test_point_events(self):
        root = np.array([0.0, 0.0, 0.9])
        ball = np.array([0.4, 0.0, 0.06])
        for scored, sign in ((1.0, 1.0), (-1.0, -1.0)):
            bd = rw.reward_soccer_match(root, root, ball, ball, np.zeros(3),
                                        np.array([16.0, 0, 0]), scored)
            assert bd.terms["point"] == sign
            assert bd.weights["point"] == 100.0


class TestFreeThrow:
    def test_velocity_match_is_unity(self):
        ball = np.array([4.5, 0.0, 2.0])
        hoop = np.array([0.0, 0.0, 3.0])
        from sportsim.ballistics import desired_throw_velocity
        v = desired_throw_velocity(ball, hoop)
        bd = rw.reward_free_throw(ball, v, hoop, False)
        assert bd.terms["ballvel"] == pytest.approx(1.0, rel=1e-12)

    def test_basket_event(self):
        ball = np.array([4.5, 0.0, 2.0])
        bd = rw.reward_free_throw(ball, np.zeros(3), np.array([0, 0, 3.0]), True)
        assert bd.terms["basket"] == 1.0

    def test_rest_ball_hand_value(self):
        ball = np.array([4.5, 0.0, 2.0])
        hoop = np.array([0.0, 0.0, 3.0])
        from sportsim.ballistics import desired_throw_velocity
        v = desired_throw_velocity(ball, hoop)
        bd = rw.reward_free_throw(ball, np.zeros(3), hoop, False)
        assert bd.terms["ballvel"] == pytest.approx(np.exp(-0.1 * np.sum(v ** 2)), rel=1e-9)


class TestBreakdownInvariants:
    def test_total_is_weighted_sum_batch(self):
        rng = np.random.default_rng(1)
        pos = rng.uniform(-5, 30, size=(64, 3))
        prev = pos + rng.uniform(-0.5, 0.5, size=(64, 3))
        bd = rw.reward_high_jump(pos, prev)
        bd.check(atol=1e-9)
        recomputed = sum(np.asarray(bd.weights[k]) * np.asarray(v)
                         for k, v in bd.terms.items())
        np.testing.assert_allclose(recomputed, bd.total, atol=1e-9)

    def test_exp_terms_in_unit_interval(self):
        rng = np.random.default_rng(2)
        ball = rng.uniform(-5, 5, size=(128, 3)) + (0, 0, 5)
        vel = rng.uniform(-10, 10, size=(128, 3))
        club = ball + rng.uniform(-1, 1, size=(128, 3))
        tgt = rng.uniform(-10, 10, size=(128, 3)) * (1, 1, 0)
        bd = rw.reward_golf(ball, ball, vel, club, tgt, np.zeros(128, dtype=bool))
        for name in ("contact", "goal", "prediction"):
            t = np.asarray(bd.terms[name])
            assert np.all(t > 0) and np.all(t <= 1.0)

    def test_progress_terms_clamped(self):
        rng = np.random.default_rng(3)
        pos = rng.uniform(0, 120, size=(128, 3))
        prev = pos + rng.uniform(-5, 5, size=(128, 3))
        bd = rw.reward_hurdling(pos, prev)
        t = np.asarray(bd.terms["distance"])
        assert np.all(t >= 0) and np.all(t <= 1.0)


class TestRigidInvariance:
    """Kernels without absolute track coordinates are invariant under a
    rigid yaw + xy translation applied to all positional inputs."""

    @staticmethod
    def transform(rng):
        phi = rng.uniform(-np.pi, np.pi)
        c, s = np.cos(phi), np.sin(phi)
        rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])
        shift = np.array([rng.uniform(-8, 8), rng.uniform(-8, 8), 0.0])
        return rot, shift

    def test_combat_invariant(self):
        rng = np.random.default_rng(5)
        for _ in range(40):
            root = rng.uniform(-3, 3, 3) + (0, 0, 1)
            vel = rng.uniform(-2, 2, 3)
            opp = rng.uniform(-3, 3, 3) + (0, 0, 1)
            tip = rng.uniform(-3, 3, 3) + (0, 0, 1)
            targets = opp + rng.uniform(-0.4, 0.4, (5, 3))
            yaw = rng.uniform(-np.pi, np.pi)
            heading = np.array([np.cos(yaw), np.sin(yaw)])
            a = rw.reward_combat(root, heading, vel, opp, tip, targets, False).total
            rot, shift = self.transform(rng)
            heading2 = rot[:2, :2] @ heading
            b = rw.reward_combat(rot @ root + shift, heading2, rot @ vel,
                                 rot @ opp + shift, rot @ tip + shift,
                                 targets @ rot.T + shift, False).total
            assert b == pytest.approx(a, abs=1e-6)

    def test_free_throw_invariant(self):
        rng = np.random.default_rng(6)
        for _ in range(40):
            ball = rng.uniform(-3, 3, 3) + (0, 0, 1.5)
            vel = rng.uniform(-5, 5, 3)
            hoop = ball + rng.uniform(1, 4, 3)
            a = rw.reward_free_throw(ball, vel, hoop, False).total
            rot, shift = self.transform(rng)
            b = rw.reward_free_throw(rot @ ball + shift, rot @ vel,
                                     rot @ hoop + shift, False).total
            assert b == pytest.approx(a, abs=1e-6)

    def test_track_kernels_sensitive_to_absolute_x(self):
        # absolute-coordinate kernels are only invariant under the identity
        pos = np.array([20.0, 6.0, 1.5])
        shifted = pos + np.array([1.0, 0.0, 0.0])
        a = rw.reward_high_jump(pos, pos).total
        b = rw.reward_high_jump(shifted, shifted).total
        assert a != b
