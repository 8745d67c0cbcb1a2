/**
 * Run the reference random-policy loop against a served engine.
 *
 *   sportsim serve --sport penalty_kick --batch 8 --port 7864 &
 *   npm run build && node dist/runRandom.js 127.0.0.1 7864 60
 */
import { BridgeClient } from "./client.js";
import { randomRollout } from "./randomLoop.js";

async function main(): Promise<void> {
  const host = process.argv[2] ?? "127.0.0.1";
  const port = Number(process.argv[3] ?? 7864);
  const steps = Number(process.argv[4] ?? 60);
  const client = await BridgeClient.connectTcp(host, port);
  const spec = client.spec ?? (await client.handshake());
  console.log(
    `connected: ${spec.sport}, batch ${spec.numEnvs} x ${spec.nAgents} agents, ` +
      `obs ${spec.obsDim}, actions ${spec.actionDim}`,
  );
  const report = await randomRollout(client, steps, 7);
  console.log(
    `${report.steps} steps, ${report.episodes} episodes, ` +
      `total reward ${report.totalReward.toFixed(3)}`,
  );
  await client.close();
}

main().catch((err) => {
  console.error(err);
  process.exit(1);
});
