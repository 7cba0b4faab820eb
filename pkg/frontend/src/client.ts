/**
 * Thin typed client for the armplan planning service.
 *
 * Every method maps to one endpoint, sends plain JSON, and validates the
 * response against the schemas in types.ts.  Server-reported failures
 * (unknown names, invalid goals, timeouts) surface as ApiError with the
 * machine-readable code the service returned.
 */

import { z } from "zod";
import {
  anytimeSchema,
  benchSchema,
  cvSchema,
  healthSchema,
  plannerSchema,
  ratiosSchema,
  robotAddedSchema,
  trajectorySchema,
  validitySchema,
  worldSchema,
  type AnytimeResult,
  type BenchResult,
  type Goal,
  type ObjectInit,
  type PoseInit,
  type RobotInit,
  type TrajectoryDoc,
} from "./types.js";

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

export class ApiError extends Error {
  /** HTTP status of the failed call. */
  readonly status: number;
  /** Error class name reported by the service, e.g. "NoPathExists". */
  readonly code: string;
  /** Human-readable detail string. */
  readonly detail: string;

  constructor(status: number, code: string, detail: string) {
    super(`${code} (${status}): ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
    this.detail = detail;
  }
}

// ---------------------------------------------------------------------------
// Wire helpers
// ---------------------------------------------------------------------------

function poseBody(pose: PoseInit | undefined): Record<string, unknown> | undefined {
  if (pose === undefined) return undefined;
  return { p: pose.p, q: pose.q };
}

function goalBody(goal: Goal): Record<string, unknown> {
  const body: Record<string, unknown> = {};
  if (goal.joint !== undefined) body.joint = goal.joint;
  if (goal.position !== undefined) body.position = goal.position;
  if (goal.pose !== undefined) body.pose = goal.pose;
  if (goal.tolerance !== undefined) body.tolerance = goal.tolerance;
  if (goal.orientationTolerance !== undefined) {
    body.orientation_tolerance = goal.orientationTolerance;
  }
  return body;
}

function stripUndefined(body: Record<string, unknown>): Record<string, unknown> {
  return Object.fromEntries(Object.entries(body).filter(([, v]) => v !== undefined));
}

// ---------------------------------------------------------------------------
// Client
// ---------------------------------------------------------------------------

export interface ValidateRequest {
  trajectory: TrajectoryDoc;
  worldId?: string;
  robot?: string;
  robotName?: string;
  scene?: string;
  step?: number;
}

export interface BenchRequest {
  scenarioPath?: string;
  scenario?: Record<string, unknown>;
  baseDir?: string;
  seed?: number;
}

export class PlannerClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(
    method: string,
    path: string,
    schema: z.ZodType<T, z.ZodTypeDef, unknown>,
    body?: Record<string, unknown>
  ): Promise<T> {
    const res = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(stripUndefined(body)),
    });
    const text = await res.text();
    let doc: unknown = null;
    try {
      doc = text === "" ? null : JSON.parse(text);
    } catch {
      doc = null;
    }
    if (!res.ok) {
      const rec = (doc ?? {}) as Record<string, unknown>;
      const code = typeof rec.error === "string" ? rec.error : `HTTP${res.status}`;
      const detail = typeof rec.detail === "string" ? rec.detail : text.slice(0, 400);
      throw new ApiError(res.status, code, detail);
    }
    return schema.parse(doc);
  }

  // -- service ------------------------------------------------------------

  async health(): Promise<{ status: string; plannerIds: string[] }> {
    const doc = await this.request("GET", "/health", healthSchema);
    return { status: doc.status, plannerIds: doc.planner_ids };
  }

  // -- worlds -------------------------------------------------------------

  async createWorld(): Promise<string> {
    const doc = await this.request("POST", "/worlds", worldSchema, {});
    return doc.world_id;
  }

  async deleteWorld(worldId: string): Promise<void> {
    await this.request("DELETE", `/worlds/${worldId}`, z.object({ ok: z.boolean() }));
  }

  async addRobot(worldId: string, init: RobotInit): Promise<{ name: string; nq: number }> {
    return this.request("POST", `/worlds/${worldId}/robots`, robotAddedSchema, {
      spec: init.spec,
      name: init.name,
      base_pose: poseBody(init.basePose),
      end_effector: init.endEffector,
    });
  }

  async addObject(worldId: string, obj: ObjectInit): Promise<string> {
    const doc = await this.request(
      "POST",
      `/worlds/${worldId}/objects`,
      z.object({ name: z.string() }),
      {
        name: obj.name,
        type: obj.type,
        size: obj.size,
        radius: obj.radius,
        pose: poseBody(obj.pose),
      }
    );
    return doc.name;
  }

  async removeObject(worldId: string, name: string): Promise<void> {
    await this.request(
      "DELETE",
      `/worlds/${worldId}/objects/${name}`,
      z.object({ ok: z.boolean() })
    );
  }

  async loadScene(worldId: string, spec: string): Promise<string[]> {
    const doc = await this.request(
      "POST",
      `/worlds/${worldId}/scene`,
      z.object({ objects: z.array(z.string()) }),
      { spec }
    );
    return doc.objects;
  }

  async setBasePose(worldId: string, name: string, pose: PoseInit): Promise<void> {
    await this.request("POST", `/worlds/${worldId}/base_pose`, z.object({ ok: z.boolean() }), {
      name,
      pose: poseBody(pose),
    });
  }

  // -- planning -----------------------------------------------------------

  async createPlanner(
    worldId: string,
    robots: string[],
    params: Record<string, string>
  ): Promise<{ token: string; plannerId: string }> {
    const doc = await this.request("POST", `/worlds/${worldId}/planners`, plannerSchema, {
      robots,
      params,
    });
    return { token: doc.planner_token, plannerId: doc.planner_id };
  }

  async plan(token: string, start: number[], goal: Goal): Promise<TrajectoryDoc> {
    return this.request("POST", `/planners/${token}/plan`, trajectorySchema, {
      start,
      goal: goalBody(goal),
    });
  }

  async planAnytime(token: string, start: number[], goal: Goal): Promise<AnytimeResult> {
    return this.request("POST", `/planners/${token}/plan_anytime`, anytimeSchema, {
      start,
      goal: goalBody(goal),
    });
  }

  async planMulti(
    token: string,
    starts: Record<string, number[]>,
    goals: Record<string, Goal>
  ): Promise<TrajectoryDoc> {
    const goalDocs = Object.fromEntries(
      Object.entries(goals).map(([name, g]) => [name, goalBody(g)])
    );
    return this.request("POST", `/planners/${token}/plan_multi`, trajectorySchema, {
      starts,
      goals: goalDocs,
    });
  }

  // -- validation and benchmarking ----------------------------------------

  async validateTrajectory(req: ValidateRequest): Promise<boolean> {
    const doc = await this.request("POST", "/validate", validitySchema, {
      trajectory: req.trajectory,
      world_id: req.worldId,
      robot: req.robot,
      robot_name: req.robotName,
      scene: req.scene,
      step: req.step,
    });
    return doc.valid;
  }

  async bench(req: BenchRequest): Promise<BenchResult> {
    return this.request("POST", "/bench", benchSchema, {
      scenario_path: req.scenarioPath,
      scenario: req.scenario,
      base_dir: req.baseDir,
      seed: req.seed,
    });
  }

  // -- metrics ------------------------------------------------------------

  async cv(costs: number[]): Promise<number> {
    const doc = await this.request("POST", "/metrics/cv", cvSchema, { costs });
    return doc.cv_percent;
  }

  async runtimeRatios(
    times: Array<number | null> | Record<string, number | null>
  ): Promise<Array<number | null> | Record<string, number | null>> {
    const doc = await this.request("POST", "/metrics/runtime_ratios", ratiosSchema, { times });
    return doc.ratios;
  }
}
