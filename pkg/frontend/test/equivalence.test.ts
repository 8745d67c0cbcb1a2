/**
 * Cross-boundary equivalence: the TypeScript client must observe exactly
 * the bytes the engine produces in process for the same seed and action
 * stream. The reference fixture carries the action stream and per-step
 * sha256 digests of the expected (obs, rewards, dones) wire payloads.
 */
import { spawn, ChildProcess } from "node:child_process";
import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { createInterface } from "node:readline";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { BridgeClient } from "../src/client.js";
import { randomRollout } from "../src/randomLoop.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixture = JSON.parse(
  readFileSync(join(here, "..", "fixtures", "reference_rollout.json"), "utf-8"),
);

interface Server {
  proc: ChildProcess;
  port: number;
}

function startServer(sport: string, batch: number, seed: number,
                     timeLimit: number | null, sessions = 1): Promise<Server> {
  const args = [
    "-m", "sportsim.harness.cli", "serve",
    "--sport", sport, "--batch", String(batch), "--seed", String(seed),
    "--port", "0", "--max-sessions", String(sessions),
  ];
  if (timeLimit !== null) args.push("--time-limit", String(timeLimit));
  const proc = spawn("python3", args, { stdio: ["ignore", "pipe", "inherit"] });
  return new Promise((resolve, reject) => {
    const rl = createInterface({ input: proc.stdout! });
    rl.once("line", (line) => {
      const m = /LISTENING .*:(\d+)/.exec(line);
      if (!m) reject(new Error(`unexpected server banner: ${line}`));
      else resolve({ proc, port: Number(m[1]) });
    });
    proc.once("error", reject);
    proc.once("exit", (code) =>
      reject(new Error(`server exited early with code ${code}`)));
  });
}

function stopServer(server: Server): Promise<void> {
  return new Promise((resolve) => {
    if (server.proc.exitCode !== null) return resolve();
    const timer = setTimeout(() => {
      server.proc.kill("SIGKILL");
    }, 10_000);
    server.proc.once("exit", () => {
      clearTimeout(timer);
      resolve();
    });
  });
}

describe("cross-boundary equivalence", () => {
  let server: Server;
  let client: BridgeClient;

  beforeAll(async () => {
    server = await startServer(fixture.sport, fixture.batch, fixture.seed,
                               fixture.time_limit);
    client = await BridgeClient.connectTcp("127.0.0.1", server.port);
  }, 60_000);

  afterAll(async () => {
    await client.close();
    await stopServer(server);
  }, 30_000);

  it("negotiates the environment spec from the card", async () => {
    const spec = await client.handshake();
    expect(spec.sport).toBe(fixture.sport);
    expect(spec.numEnvs).toBe(fixture.batch);
    expect(spec.nAgents).toBe(fixture.n_agents);
    expect(spec.obsDim).toBe(fixture.obs_dim);
    expect(spec.actionDim).toBe(fixture.action_dim);
    const digest = createHash("sha256")
      .update(Buffer.from(spec.initialObs.buffer, spec.initialObs.byteOffset,
                          spec.initialObs.byteLength))
      .digest("hex");
    expect(digest).toBe(fixture.initial_obs_sha256);
  }, 30_000);

  it("reproduces every step digest bitwise over 10+ episodes", async () => {
    expect(fixture.episodes).toBeGreaterThanOrEqual(10);
    let episodes = 0;
    for (let t = 0; t < fixture.step_sha256.length; t++) {
      const actions = Float32Array.from(fixture.actions[t] as number[]);
      const result = await client.stepBatch(actions);
      const digest = createHash("sha256");
      for (const chunk of result.rawBytes) digest.update(chunk);
      expect(digest.digest("hex"), `step ${t}`).toBe(fixture.step_sha256[t]);
      for (let i = 0; i < result.dones.length; i += fixture.n_agents) {
        if (result.dones[i] > 0) episodes += 1;
      }
    }
    expect(episodes).toBe(fixture.episodes);
  }, 120_000);
});

describe("reference random-policy loop", () => {
  it("runs the documented contract end to end", async () => {
    const server = await startServer("hurdling", 2, 11, 2.0);
    try {
      const client = await BridgeClient.connectTcp("127.0.0.1", server.port);
      const report = await randomRollout(client, 15, 3);
      expect(report.steps).toBe(15);
      expect(Number.isFinite(report.totalReward)).toBe(true);
      await client.close();
    } finally {
      await stopServer(server);
    }
  }, 60_000);
});
