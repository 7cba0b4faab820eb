#!/usr/bin/env ts-node
/**
 * armplan service walkthrough.
 *
 * Drives a running planning service end to end: builds a world with one
 * planar arm and an obstacle, plans with two planners, validates the
 * result, runs a small benchmark, and writes SVG charts plus the raw CSV
 * under out/.
 *
 * Usage:
 *   armplan serve --port 8330     # in another terminal, same machine
 *   npm run demo -- [base-url]    # default http://127.0.0.1:8330
 */

import { mkdir, writeFile } from "fs/promises";
import path from "path";
import { PlannerClient } from "./client.js";
import { summaryCharts } from "./plots.js";
import { parseBenchCsv, summarize, summaryTable } from "./stats.js";
import { duration, metadataNumber, totalJointLength } from "./trajectory.js";

const PLANAR2_YAML = `
name: planar2
joints:
  - {name: j1, parent: base, child: l1, axis: [0, 0, 1], origin: {p: [0, 0, 0.1]}, limits: [-3.0, 3.0]}
  - {name: j2, parent: l1, child: l2, axis: [0, 0, 1], origin: {p: [0.4, 0, 0]}, limits: [-2.5, 2.5]}
links:
  - {name: l1, capsules: [{a: [0.05, 0, 0], b: [0.35, 0, 0], radius: 0.04}]}
  - {name: l2, capsules: [{a: [0.05, 0, 0], b: [0.35, 0, 0], radius: 0.04}]}
end_effector: l2
`;

const PILLAR_SCENE_YAML = `
objects:
  - {name: pillar, type: sphere, radius: 0.08, pose: {p: [0.45, 0.45, 0.1]}}
`;

// ---------------------------------------------------------------------------
// Main
// ---------------------------------------------------------------------------

async function main(): Promise<void> {
  const baseUrl = process.argv[2] ?? "http://127.0.0.1:8330";
  const outDir = path.join(process.cwd(), "out");
  await mkdir(outDir, { recursive: true });

  const client = new PlannerClient(baseUrl);
  const health = await client.health();
  console.log(`service ok, planners: ${health.plannerIds.join(", ")}`);

  // --- World with one arm and a pillar obstacle ---
  const worldId = await client.createWorld();
  const robot = await client.addRobot(worldId, { spec: PLANAR2_YAML });
  const objects = await client.loadScene(worldId, PILLAR_SCENE_YAML);
  console.log(`world ${worldId}: robot ${robot.name} (${robot.nq} dof), objects [${objects.join(", ")}]`);

  // --- One query, planned and validated ---
  const planner = await client.createPlanner(worldId, [robot.name], {
    planner_id: "wAstar",
    w: "2.0",
    resolution: "0.1",
  });
  const start = [-1.0, 0.0];
  const goal = { joint: [1.0, 0.5] };
  const traj = await client.plan(planner.token, start, goal);
  const valid = await client.validateTrajectory({ trajectory: traj, worldId });
  console.log(
    `plan: cost ${metadataNumber(traj, "cost")?.toFixed(4)}, ` +
      `joint length ${totalJointLength(traj).toFixed(4)}, ` +
      `duration ${duration(traj).toFixed(2)}s, valid ${valid}`
  );

  // --- Anytime refinement ---
  const anytime = await client.createPlanner(worldId, [robot.name], {
    planner_id: "ARAstar",
    w_start: "5.0",
    resolution: "0.1",
  });
  const steps = await client.planAnytime(anytime.token, start, goal);
  for (const sol of steps.solutions) {
    console.log(`  bound ${sol.bound.toFixed(2)} -> cost ${sol.cost.toFixed(4)}`);
  }

  // --- Benchmark: the scenario references files, so stage them first ---
  await writeFile(path.join(outDir, "planar2.yaml"), PLANAR2_YAML);
  await writeFile(path.join(outDir, "pillar.yaml"), PILLAR_SCENE_YAML);
  const scenario = {
    robots: [{ file: "planar2.yaml" }],
    scene: "pillar.yaml",
    repetitions: 3,
    perturbation_deg: 2.0,
    time_limit: 5.0,
    seed: 1,
    planners: [
      { label: "wastar_w1", params: { planner_id: "wAstar", w: "1.0", resolution: "0.1" } },
      { label: "wastar_w3", params: { planner_id: "wAstar", w: "3.0", resolution: "0.1" } },
      { label: "arastar", params: { planner_id: "ARAstar", w_start: "5.0", resolution: "0.1" } },
    ],
    problems: [
      { id: "sweep", start: [-1.0, 0.0], goal: { joint: [1.0, 0.5] } },
      { id: "tuck", start: [0.0, 0.0], goal: { joint: [-2.0, 2.0] } },
    ],
  };
  const bench = await client.bench({ scenario, baseDir: outDir });
  const records = parseBenchCsv(bench.csv);
  const summary = summarize(records);
  console.log("\n" + summaryTable(summary));

  const subtitle = `${records.length} runs  ·  ${baseUrl}`;
  await writeFile(path.join(outDir, "bench.csv"), bench.csv);
  const charts = summaryCharts(summary, subtitle);
  for (const [name, svg] of Object.entries(charts)) {
    await writeFile(path.join(outDir, `${name}.svg`), svg);
  }
  console.log(`\nartifacts in ${outDir}: bench.csv, ${Object.keys(charts).map((n) => `${n}.svg`).join(", ")}`);

  await client.deleteWorld(worldId);
}

main().catch((err) => {
  console.error("Fatal:", err instanceof Error ? err.message : err);
  process.exit(1);
});
