"""Wire protocol: framing, conformance fixture, cross-boundary equivalence."""
import json
import os
import socket
import subprocess
import sys
import time

import numpy as np
import pytest

from sportsim.bridge import (KIND_CLOSE, KIND_OBS, KIND_RESET, KIND_STEP,
                             MAGIC, PROTOCOL_VERSION, BridgeClient,
                             conformance_bytes, decode_frame, encode_frame,
                             parse_stream, random_rollout)
from sportsim.envs import make_env
from sportsim.errors import ProtocolError

FIXTURE = os.path.join(os.path.dirname(__file__), "..", "fixtures",
                       "bridge_conformance.bin")


def spawn_server(sport="penalty_kick", batch=2, seed=5, max_sessions=1,
                 time_limit=None, unix_path=None):
    """Launch the CLI server; returns (proc, port-or-unix-path)."""
    cmd = [sys.executable, "-m", "sportsim.harness.cli", "serve", "--sport", sport,
           "--batch", str(batch), "--seed", str(seed), "--port", "0",
           "--max-sessions", str(max_sessions)]
    if time_limit is not None:
        cmd += ["--time-limit", str(time_limit)]
    if unix_path is not None:
        cmd += ["--unix", str(unix_path)]
    proc = subprocess.Popen(cmd, stdout=subprocess.PIPE, text=True)
    line = proc.stdout.readline().strip()
    assert line.startswith("LISTENING"), line
    if unix_path is not None:
        return proc, line.split("unix:", 1)[1]
    return proc, int(line.split(":")[-1])


def stop_server(proc):
    try:
        proc.wait(timeout=15)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.wait(timeout=5)


class TestFraming:
    def test_roundtrip(self):
        arrays = [np.arange(12, dtype="<f4").reshape(3, 4),
                  np.array([1.5], dtype="<f4")]
        blob = encode_frame(KIND_STEP, 3, arrays)
        version, kind, batch, out = decode_frame(blob[4:])
        assert (version, kind, batch) == (PROTOCOL_VERSION, KIND_STEP, 3)
        np.testing.assert_array_equal(out[0], arrays[0])
        np.testing.assert_array_equal(out[1], arrays[1])

    def test_bad_magic_rejected(self):
        blob = bytearray(encode_frame(KIND_RESET, 0))
        blob[4:8] = b"XXXX"
        with pytest.raises(ProtocolError):
            decode_frame(bytes(blob[4:]))

    def test_shape_mismatch_rejected(self):
        blob = bytearray(encode_frame(KIND_OBS, 1, [np.zeros(4, dtype="<f4")]))
        with pytest.raises(ProtocolError):
            decode_frame(bytes(blob[4:-4]))  # truncate payload


class TestConformanceFixture:
    def test_fixture_bytes_are_published(self):
        blob = open(FIXTURE, "rb").read()
        assert blob == conformance_bytes()

    def test_fixture_parses(self):
        frames = parse_stream(open(FIXTURE, "rb").read())
        kinds = [f[1] for f in frames]
        assert kinds == [KIND_RESET, KIND_OBS, KIND_STEP, KIND_CLOSE]
        _, _, batch, arrays = frames[1]
        assert batch == 2
        np.testing.assert_array_equal(arrays[0],
                                      np.arange(6, dtype="<f4").reshape(2, 3))
        np.testing.assert_array_equal(arrays[1], np.array([7, 9], dtype="<f4"))
        step_arrays = frames[2][3]
        np.testing.assert_array_equal(
            step_arrays[0], np.array([[0.5, -0.5], [1.5, -1.5]], dtype="<f4"))

    def test_fixture_matches_json_sidecar(self):
        meta = json.load(open(FIXTURE.replace(".bin", ".json")))
        assert meta["magic"] == MAGIC.decode()
        assert meta["version"] == PROTOCOL_VERSION
        frames = parse_stream(open(FIXTURE, "rb").read())
        assert len(frames) == len(meta["frames"])
        for frame, expect in zip(frames, meta["frames"]):
            assert frame[1] == meta["kinds"][expect["kind"]]
            for arr, earr in zip(frame[3], expect["arrays"]):
                assert list(arr.shape) == earr["shape"]
                np.testing.assert_allclose(arr.ravel(), earr["data"])


class TestCrossBoundary:
    def test_bridged_equals_in_process_bitwise(self):
        proc, port = spawn_server(batch=3, seed=21)
        try:
            client = BridgeClient(port=port)
            spec = client.connect()
            assert spec["sport"] == "penalty_kick"
            assert spec["action_dim"] == 69
            local = make_env("penalty_kick", num_envs=3, seed=21)
            local_obs = local.reset()
            rows = spec["num_envs"] * spec["n_agents"]
            np.testing.assert_array_equal(
                spec["initial_obs"], local_obs.reshape(rows, -1).astype("<f4"))
            rng = np.random.default_rng(0)
            episodes = 0
            while episodes < 10:
                actions = rng.uniform(-1, 1, (rows, spec["action_dim"])).astype("<f4")
                obs_b, rew_b, done_b = client.step_batch(actions)
                res = local.step(actions.astype(np.float64))
                np.testing.assert_array_equal(
                    obs_b, res.obs.reshape(rows, -1).astype("<f4"))
                np.testing.assert_array_equal(
                    rew_b, res.rewards.reshape(rows).astype("<f4"))
                np.testing.assert_array_equal(
                    done_b, np.repeat(res.done, spec["n_agents"]).astype("<f4"))
                episodes += int(np.sum(res.done))
            client.close()
        finally:
            proc.wait(timeout=10)

    def test_protocol_error_preserves_session(self):
        proc, port = spawn_server(batch=2, seed=3)
        try:
            client = BridgeClient(port=port)
            spec = client.connect()
            rows = spec["num_envs"] * spec["n_agents"]
            # wrong shape is refused without dropping the session
            bad = np.zeros((rows, spec["action_dim"] + 1), dtype="<f4")
            client.sock.sendall(encode_frame(KIND_STEP, spec["num_envs"], (bad,)))
            from sportsim.bridge import read_frame
            _, kind, _, arrays = read_frame(client.sock)
            assert kind == KIND_OBS and arrays == []
            good = np.zeros((rows, spec["action_dim"]), dtype="<f4")
            obs, rew, done = client.step_batch(good)
            assert obs.shape == (rows, spec["obs_dim"])
            client.close()
        finally:
            proc.wait(timeout=10)

    def test_version_mismatch_refused(self):
        proc, port = spawn_server(batch=1, seed=1)
        try:
            sock = socket.create_connection(("127.0.0.1", port), timeout=10)
            sock.sendall(encode_frame(KIND_RESET, 0, version=99))
            from sportsim.bridge import read_frame
            _, kind, _, _ = read_frame(sock)
            assert kind == KIND_CLOSE
            sock.close()
        finally:
            proc.wait(timeout=10)

    def test_reference_random_rollout(self):
        proc, port = spawn_server(sport="hurdling", batch=2, seed=7)
        try:
            report = random_rollout("127.0.0.1", port, steps=12, seed=1)
            assert report["steps"] == 12
            assert np.isfinite(report["total_reward"])
        finally:
            stop_server(proc)

    def test_unix_socket_transport(self, tmp_path):
        sock_path = str(tmp_path / "bridge.sock")
        proc, path = spawn_server(sport="hurdling", batch=2, seed=4,
                                  unix_path=sock_path, time_limit=2.0)
        try:
            client = BridgeClient(unix_path=path)
            spec = client.connect()
            local = make_env("hurdling", num_envs=2, seed=4, time_limit=2.0)
            rows = spec["num_envs"] * spec["n_agents"]
            np.testing.assert_array_equal(
                spec["initial_obs"], local.reset().reshape(rows, -1).astype("<f4"))
            actions = np.zeros((rows, spec["action_dim"]), dtype="<f4")
            obs_b, _, _ = client.step_batch(actions)
            res = local.step(actions.astype(np.float64))
            np.testing.assert_array_equal(obs_b, res.obs.reshape(rows, -1).astype("<f4"))
            client.close()
        finally:
            stop_server(proc)
