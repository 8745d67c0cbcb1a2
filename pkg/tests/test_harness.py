"""Harness: evaluation runs, trajectory logs, bitwise replay, CLI."""
import json
import os

import numpy as np
import pytest

from sportsim.envs import load_config, make_env
from sportsim.errors import ConfigError, ReplayError
from sportsim.harness import (RunSpec, make_policy, read_log, replay,
                              run_bench, run_eval)
from sportsim.harness.cli import main as cli_main
from sportsim.harness.trajlog import TrajectoryWriter


def short_cfg(sport, limit=1.2, **kw):
    return load_config(sport, time_limit=limit, **kw)


def record_log(tmp_path, sport="penalty_kick", num_envs=3, steps=25, seed=13,
               policy_name="random", time_limit=0.8):
    cfg = short_cfg(sport, time_limit)
    env = make_env(sport, num_envs=num_envs, seed=seed, config=cfg)
    policy = make_policy(policy_name, seed=seed)
    policy.reset(env)
    path = tmp_path / "run.bin"
    writer = TrajectoryWriter(path, env, policy_name)
    obs = env.reset()
    writer.write_initial(obs)
    for step in range(steps):
        actions = policy.act(env, step).astype(np.float32).astype(np.float64)
        res = env.step(actions)
        writer.write_step(step, actions, res.obs, res.rewards, res.done,
                          res.info["reason"], terms=res.info["terms"],
                          match=(env.scores, env.serving_side, env.n_hit))
    writer.close()
    return path


class TestRunEval:
    def test_scripted_eval_emits_table(self, tmp_path):
        spec = RunSpec(sport="hurdling", policy="straight_runner", batch_size=8,
                       trials=16, seed=1, out_dir=str(tmp_path),
                       config_overrides={"time_limit": 2.0})
        result = run_eval(spec)
        assert result["accumulator"].trials == 16
        assert "Suc Rate" in result["table_text"]
        assert os.path.exists(result["paths"]["metrics_csv"])
        run_doc = json.loads(open(result["paths"]["run_json"]).read())
        assert run_doc["seed"] == 1 and "config_hash" in run_doc

    def test_identical_specs_identical_tables(self, tmp_path):
        spec = dict(sport="tennis", policy="fixed_swing", batch_size=4,
                    trials=8, seed=9, config_overrides={"time_limit": 2.0})
        a = run_eval(RunSpec(**spec))
        b = run_eval(RunSpec(**spec))
        assert a["table_csv"] == b["table_csv"]

    def test_worker_count_does_not_change_results(self):
        base = dict(sport="golf", batch_size=6, trials=12, seed=3,
                    config_overrides={"time_limit": 1.0})
        one = run_eval(RunSpec(workers=1, **base))
        four = run_eval(RunSpec(workers=4, **base))
        # identical episodes in identical order; per-shard float summation
        # may differ in the last ulp, so compare metric values numerically
        assert [e.env_index for e in one["episodes"]] \
            == [e.env_index for e in four["episodes"]]
        va, vb = one["accumulator"].values(), four["accumulator"].values()
        for key, value in va.items():
            if value is None:
                assert vb[key] is None
            else:
                assert vb[key] == pytest.approx(value, rel=1e-12)

    def test_exact_trial_count(self):
        spec = RunSpec(sport="golf", batch_size=7, trials=10, seed=2,
                       config_overrides={"time_limit": 1.0})
        result = run_eval(spec)
        assert result["accumulator"].trials == 10
        assert len(result["episodes"]) == 10

    def test_bad_spec_rejected(self):
        with pytest.raises(ConfigError):
            RunSpec(sport="golf", trials=0)

    def test_golf_swing_latches_contact(self):
        spec = RunSpec(sport="golf", batch_size=8, trials=8, seed=2,
                       config_overrides={"time_limit": 5.0})
        result = run_eval(spec)
        values = result["accumulator"].values()
        assert values["hit_rate_pct"] == pytest.approx(100.0)
        assert values["error_dis"] is not None

    def test_returner_scores_table_tennis_hits(self):
        spec = RunSpec(sport="table_tennis", batch_size=16, trials=100, seed=2,
                       config_overrides={"time_limit": 30.0})
        result = run_eval(spec)
        values = result["accumulator"].values()
        assert values["avg_hits"] > 0.0
        assert values["error_dis"] is not None


class TestReplay:
    def test_fresh_log_replays_bitwise(self, tmp_path):
        path = record_log(tmp_path)
        verdict = replay(path)
        assert verdict["ok"] and verdict["mismatches"] == 0
        assert verdict["steps"] == 25

    def test_replay_covers_resets(self, tmp_path):
        # short time limit forces auto-resets inside the logged window
        path = record_log(tmp_path, sport="golf", steps=40, time_limit=0.5)
        assert replay(path)["ok"]

    def test_single_env_extraction_matches(self, tmp_path):
        path = record_log(tmp_path, num_envs=4, steps=20)
        for k in range(4):
            verdict = replay(path, env_index=k)
            assert verdict["ok"], f"env {k} diverged when replayed alone"

    def test_corruption_detected(self, tmp_path):
        path = record_log(tmp_path, steps=5)
        blob = bytearray(path.read_bytes())
        blob[len(blob) // 2] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(ReplayError):
            replay(path)

    def test_schema_sidecar_written(self, tmp_path):
        path = record_log(tmp_path, steps=2)
        sidecar = str(path) + ".schema.txt"
        assert os.path.exists(sidecar)
        assert "length-delimited" in open(sidecar).read()

    def test_log_roundtrip_fields(self, tmp_path):
        path = record_log(tmp_path, steps=4, num_envs=2)
        log = read_log(path)
        assert log.header["sport"] == "penalty_kick"
        assert len(log.actions) == 4
        assert log.initial_obs.shape[0] == 2


class TestBench:
    def test_bench_smoke(self):
        report = run_bench("penalty_kick", batch_size=8, duration_s=0.3,
                           warmup_steps=3)
        assert report["env_steps_per_s"] > 0
        assert report["p50_latency_s"] > 0
        assert report["steps"] > 0


class TestBridgePolicySource:
    @staticmethod
    def _policy_server(port_holder, stop, replies):
        """Minimal external policy: answers obs frames with zero actions."""
        import socket
        import struct as _struct
        import numpy as np
        from sportsim.bridge import (KIND_STEP, RxBuffer, read_frame,
                                     send_frame)
        srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        srv.bind(("127.0.0.1", 0))
        srv.listen(1)
        srv.settimeout(20.0)
        port_holder.append(srv.getsockname()[1])
        conn, _ = srv.accept()
        rx = RxBuffer()
        try:
            while not stop.is_set():
                try:
                    _, kind, batch, arrays = read_frame(conn, rx)
                except (ConnectionError, OSError):
                    break
                rows = arrays[0].shape[0]
                actions = np.zeros((rows, 69), dtype="<f4")
                send_frame(conn, KIND_STEP, batch, (actions,))
                replies.append(1)
        finally:
            conn.close()
            srv.close()

    def test_eval_with_bridged_policy(self):
        import threading
        port_holder, replies = [], []
        stop = threading.Event()
        thread = threading.Thread(target=self._policy_server,
                                  args=(port_holder, stop, replies), daemon=True)
        thread.start()
        for _ in range(200):
            if port_holder:
                break
            import time
            time.sleep(0.01)
        spec = RunSpec(sport="hurdling", policy=f"bridge://127.0.0.1:{port_holder[0]}",
                       batch_size=2, trials=2, seed=1,
                       config_overrides={"time_limit": 1.0})
        result = run_eval(spec)
        stop.set()
        assert result["accumulator"].trials == 2
        assert len(replies) >= 30  # one per control step

    def test_unreachable_endpoint_retries_then_aborts(self):
        import time
        from sportsim.errors import ProtocolError
        from sportsim.harness.policies import BridgePolicy
        policy = BridgePolicy("127.0.0.1:1")  # nothing listens on port 1
        t0 = time.perf_counter()
        with pytest.raises(ProtocolError, match="3 attempts"):
            policy.reset(None)
        elapsed = time.perf_counter() - t0
        # exponential backoff: 0.25 + 0.5 + 1.0 s of sleeps
        assert elapsed >= 1.7


class TestOutputStamping:
    def test_metric_files_embed_hash_and_seed(self, tmp_path):
        spec = RunSpec(sport="golf", batch_size=2, trials=2, seed=9,
                       out_dir=str(tmp_path),
                       config_overrides={"time_limit": 1.0})
        result = run_eval(spec)
        for key in ("metrics_txt", "metrics_csv"):
            head = open(result["paths"][key]).readline()
            assert "config_hash=" in head and "seed=9" in head

    def test_equal_specs_byte_identical_outputs(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        base = dict(sport="golf", batch_size=2, trials=2, seed=9,
                    config_overrides={"time_limit": 1.0})
        run_eval(RunSpec(out_dir=str(out_a), **base))
        run_eval(RunSpec(out_dir=str(out_b), **base))
        for name in ("metrics.txt", "metrics.csv", "run.json"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


class TestCLI:
    def test_card_subcommand(self, capsys):
        assert cli_main(["card", "--sport", "fencing"]) == 0
        out = capsys.readouterr().out
        assert "environment card: fencing" in out

    def test_eval_subcommand(self, tmp_path, capsys):
        code = cli_main(["eval", "--sport", "hurdling", "--policy",
                         "straight_runner", "--batch", "4", "--trials", "4",
                         "--seed", "3", "--out", str(tmp_path / "out")])
        assert code == 0
        assert "Suc Rate" in capsys.readouterr().out

    def test_replay_subcommand(self, tmp_path, capsys):
        path = record_log(tmp_path, steps=6)
        assert cli_main(["replay", str(path)]) == 0
        verdict = json.loads(capsys.readouterr().out)
        assert verdict["ok"]

    def test_config_error_exit_code(self, capsys):
        code = cli_main(["eval", "--sport", "hurdling", "--policy", "nope"])
        assert code == 2

    def test_config_override_file(self, tmp_path, capsys):
        cfg_path = tmp_path / "override.yaml"
        cfg_path.write_text("time_limit: 1.0\n")
        code = cli_main(["eval", "--sport", "golf", "--batch", "2",
                         "--trials", "2", "--config", str(cfg_path)])
        assert code == 0

    def test_config_root_env_var(self, tmp_path, monkeypatch, capsys):
        (tmp_path / "short.yaml").write_text("time_limit: 1.0\n")
        monkeypatch.setenv("SPORTSIM_CONFIG_ROOT", str(tmp_path))
        code = cli_main(["eval", "--sport", "golf", "--batch", "2",
                         "--trials", "2", "--config", "short.yaml"])
        assert code == 0
