/**
 * Helpers for trajectory documents returned by the planning service.
 */

import { trajectorySchema, type RobotTrack, type TrajectoryDoc } from "./types.js";

/** Validate an untrusted document (file contents, API response). */
export function parseTrajectory(doc: unknown): TrajectoryDoc {
  return trajectorySchema.parse(doc);
}

export function robotNames(traj: TrajectoryDoc): string[] {
  return Object.keys(traj.robots).sort();
}

/** End time of the longest robot track; 0 for an empty document. */
export function duration(traj: TrajectoryDoc): number {
  let out = 0;
  for (const track of Object.values(traj.robots)) {
    if (track.t.length > 0) out = Math.max(out, track.t[track.t.length - 1]);
  }
  return out;
}

/** Total joint-space length of one track: sum of L2 steps between waypoints. */
export function jointPathLength(track: RobotTrack): number {
  let total = 0;
  for (let i = 1; i < track.q.length; i++) {
    const a = track.q[i - 1];
    const b = track.q[i];
    let sq = 0;
    for (let j = 0; j < a.length; j++) sq += (b[j] - a[j]) * (b[j] - a[j]);
    total += Math.sqrt(sq);
  }
  return total;
}

/** Sum of joint-space lengths over all robots. */
export function totalJointLength(traj: TrajectoryDoc): number {
  let total = 0;
  for (const track of Object.values(traj.robots)) total += jointPathLength(track);
  return total;
}

/** Numeric metadata field (cost, bound, ee_cost, ...); null when absent. */
export function metadataNumber(traj: TrajectoryDoc, key: string): number | null {
  const v = traj.metadata[key];
  return typeof v === "number" && Number.isFinite(v) ? v : null;
}
