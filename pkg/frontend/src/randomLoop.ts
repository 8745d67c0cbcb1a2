/**
 * Reference random-policy loop demonstrating the bridge contract:
 * handshake, a batched act/step cycle, and episode counting from dones.
 */
import { BridgeClient } from "./client.js";

/** Deterministic uniform(-1, 1) stream (splitmix64-style), seedable. */
export class Rand {
  private state: bigint;

  constructor(seed: number) {
    this.state = BigInt(seed) & 0xffffffffffffffffn;
  }

  next(): number {
    this.state = (this.state + 0x9e3779b97f4a7c15n) & 0xffffffffffffffffn;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & 0xffffffffffffffffn;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & 0xffffffffffffffffn;
    z = z ^ (z >> 31n);
    return Number(z >> 11n) / 2 ** 53;
  }

  fillUniform(out: Float32Array): void {
    for (let i = 0; i < out.length; i++) {
      out[i] = 2 * this.next() - 1;
    }
  }
}

export interface RolloutReport {
  steps: number;
  episodes: number;
  totalReward: number;
}

export async function randomRollout(
  client: BridgeClient,
  steps: number,
  seed = 0,
): Promise<RolloutReport> {
  const spec = client.spec ?? (await client.handshake());
  const rows = spec.numEnvs * spec.nAgents;
  const actions = new Float32Array(rows * spec.actionDim);
  const rand = new Rand(seed);
  let totalReward = 0;
  let episodes = 0;
  for (let t = 0; t < steps; t++) {
    rand.fillUniform(actions);
    const result = await client.stepBatch(actions);
    for (let i = 0; i < result.rewards.length; i++) {
      totalReward += result.rewards[i];
    }
    for (let i = 0; i < result.dones.length; i += spec.nAgents) {
      if (result.dones[i] > 0) episodes += 1;
    }
  }
  return { steps, episodes, totalReward };
}
