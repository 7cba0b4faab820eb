/**
 * Wire types for the armplan HTTP service.
 *
 * Every response the client relies on is validated with a zod schema, so a
 * mismatched server version fails loudly instead of producing NaN charts.
 */

import { z } from "zod";

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

export const robotTrackSchema = z.object({
  t: z.array(z.number()),
  q: z.array(z.array(z.number())),
  qd: z.array(z.array(z.number())),
  qdd: z.array(z.array(z.number())),
});

export const trajectorySchema = z.object({
  robots: z.record(z.string(), robotTrackSchema),
  metadata: z.record(z.string(), z.unknown()).default({}),
});

export type RobotTrack = z.infer<typeof robotTrackSchema>;
export type TrajectoryDoc = z.infer<typeof trajectorySchema>;

export const anytimeSchema = z.object({
  solutions: z.array(
    z.object({
      bound: z.number(),
      cost: z.number(),
      trajectory: trajectorySchema,
    })
  ),
});

export type AnytimeResult = z.infer<typeof anytimeSchema>;

// ---------------------------------------------------------------------------
// Worlds and planning requests
// ---------------------------------------------------------------------------

export interface PoseInit {
  p?: [number, number, number];
  q?: [number, number, number, number];
}

export interface RobotInit {
  spec: string;
  name?: string;
  basePose?: PoseInit;
  endEffector?: string;
}

export interface ObjectInit {
  name: string;
  type: "box" | "sphere";
  size?: [number, number, number];
  radius?: number;
  pose?: PoseInit;
}

/** Exactly one of joint, position, pose must be given. */
export interface Goal {
  joint?: number[];
  position?: [number, number, number];
  pose?: [number, number, number, number, number, number, number];
  tolerance?: number;
  orientationTolerance?: number;
}

export const healthSchema = z.object({
  status: z.string(),
  planner_ids: z.array(z.string()),
});

export const worldSchema = z.object({ world_id: z.string() });

export const robotAddedSchema = z.object({ name: z.string(), nq: z.number() });

export const plannerSchema = z.object({
  planner_token: z.string(),
  planner_id: z.string(),
});

export const validitySchema = z.object({ valid: z.boolean() });

// ---------------------------------------------------------------------------
// Benchmarks
// ---------------------------------------------------------------------------

/** One planner run on one problem repetition; mirrors a benchmark CSV row. */
export interface BenchRecord {
  problemId: string;
  rep: number;
  planner: string;
  success: boolean;
  eeCostM: number | null;
  plannerCost: number | null;
  timeS: number;
  bound: number | null;
}

export const summaryRowSchema = z.object({
  queries: z.number(),
  successes: z.number(),
  success_rate_percent: z.number(),
  mean_ee_cost_m: z.number().nullable(),
  mean_cv_percent: z.number().nullable(),
  mean_time_s: z.number().nullable(),
  mean_effective_runtime_ratio: z.number().nullable(),
});

export const benchSchema = z.object({
  csv: z.string(),
  summary: z.record(z.string(), summaryRowSchema),
});

export type SummaryRow = z.infer<typeof summaryRowSchema>;
export type Summary = Record<string, SummaryRow>;
export type BenchResult = z.infer<typeof benchSchema>;

export const cvSchema = z.object({ cv_percent: z.number() });

export const ratiosSchema = z.object({
  ratios: z.union([
    z.array(z.number().nullable()),
    z.record(z.string(), z.number().nullable()),
  ]),
});
