"""Alternating-freeze self-play scheduler."""
import json

import pytest

from sportsim.errors import ConfigError
from sportsim.selfplay import (SelfPlaySchedule, advance, opponent_for,
                               set_slot, slot_for_step, snapshot_manifest)


class TestScheduling:
    def test_initial_slot_a(self):
        sched = SelfPlaySchedule(phase_length=10)
        assert slot_for_step(sched, 0) == "A"
        assert sched.active_slot == "A"
        assert sched.trainable_slots == ("A",)

    def test_parity_at_two_and_a_half_phases(self):
        # two swaps (at 1e6 and 2e6) have happened by step 2.5e6, so the
        # trainable slot is back to the one that started training
        sched = SelfPlaySchedule(phase_length=1_000_000)
        assert slot_for_step(sched, 2_500_000) == "A"
        advanced = advance(sched, 2_500_000)
        assert advanced.active_slot == "A"
        assert advanced.phase_index == 2
        # an odd phase count lands on the slot that started frozen
        assert slot_for_step(sched, 1_500_000) == "B"

    def test_two_phases_is_involution(self):
        sched = SelfPlaySchedule(phase_length=100)
        one = advance(sched, 100)
        two = advance(one, 200)
        assert one.active_slot == "B"
        assert two.active_slot == "A"

    def test_exactly_one_trainable_always(self):
        sched = SelfPlaySchedule(phase_length=50)
        for step in range(0, 1000, 37):
            sched = advance(sched, step)
            assert len(sched.trainable_slots) == 1
            assert sched.frozen_slot != sched.active_slot

    def test_snapshot_on_swap_and_fifo(self):
        sched = SelfPlaySchedule(phase_length=10, capacity=3)
        sched = set_slot(sched, "A", {"weights": 1})
        sched = advance(sched, 95)  # 9 swaps
        assert len(sched.snapshots) == 3
        ids = [s.snapshot_id for s in sched.snapshots]
        assert ids == sorted(ids)
        assert ids[-1] == 8  # latest phase snapshotted, older evicted FIFO

    def test_replay_reproduces_history(self):
        def run():
            sched = SelfPlaySchedule(phase_length=10, capacity=4)
            history = []
            for step in range(0, 200, 10):
                sched = advance(sched, step)
                history.append((sched.active_slot, len(sched.snapshots),
                                tuple(s.snapshot_id for s in sched.snapshots)))
            return history

        assert run() == run()

    def test_bad_config(self):
        with pytest.raises(ConfigError):
            SelfPlaySchedule(phase_length=0)
        with pytest.raises(ConfigError):
            SelfPlaySchedule(sampling="elo")


class TestOpponentSampling:
    def test_latest_returns_frozen_slot(self):
        sched = SelfPlaySchedule(phase_length=10)
        sched = set_slot(sched, "B", "policy-b")
        assert opponent_for(sched, seed=0) == "policy-b"

    def test_uniform_store_of_one(self):
        sched = SelfPlaySchedule(phase_length=10, sampling="uniform")
        sched = set_slot(sched, "A", "pol-a")
        sched = advance(sched, 10)
        assert opponent_for(sched, seed=5) == "pol-a"

    def test_uniform_is_seed_deterministic(self):
        sched = SelfPlaySchedule(phase_length=10, sampling="uniform", capacity=8)
        for phase in range(6):
            sched = set_slot(sched, sched.active_slot, f"pol-{phase}")
            sched = advance(sched, (phase + 1) * 10)
        picks = [opponent_for(sched, seed=42) for _ in range(5)]
        assert len(set(map(str, picks))) == 1
        assert opponent_for(sched, seed=42) == opponent_for(sched, seed=42)
        different = {str(opponent_for(sched, seed=s)) for s in range(40)}
        assert len(different) > 1

    def test_uniform_empty_store_falls_back(self):
        sched = SelfPlaySchedule(phase_length=10, sampling="uniform")
        sched = set_slot(sched, "B", "live-frozen")
        assert opponent_for(sched, seed=0) == "live-frozen"


class TestManifest:
    def test_manifest_lists_snapshots(self):
        sched = SelfPlaySchedule(phase_length=10, capacity=4)
        sched = set_slot(sched, "A", {"layer": [1, 2]})
        sched = advance(sched, 30)
        doc = json.loads(snapshot_manifest(sched))
        assert doc["phase_length"] == 10
        assert len(doc["snapshots"]) == 3
        for entry in doc["snapshots"]:
            assert set(entry) == {"id", "created_step", "content_hash"}
            assert len(entry["content_hash"]) == 16
