/**
 * Unit tests for the benchmark statistics mirror.
 *
 * The numeric pins here (CV of [1, 2, 3], the ratio edge cases) match the
 * values the planning service reports for the same inputs, which the
 * integration suite cross-checks over HTTP.
 */

import { describe, expect, it } from "vitest";
import {
  AllFailed,
  CsvFormatError,
  EmptyInput,
  ZeroMean,
  computeCv,
  effectiveRuntimeRatios,
  parseBenchCsv,
  summarize,
  summaryTable,
} from "../src/stats.js";
import type { BenchRecord } from "../src/types.js";

// ---------------------------------------------------------------------------
// computeCv
// ---------------------------------------------------------------------------

describe("computeCv", () => {
  it("matches the pinned population CV of [1, 2, 3]", () => {
    expect(computeCv([1, 2, 3])).toBeCloseTo(40.8248, 3);
  });

  it("is zero for a single sample", () => {
    expect(computeCv([7.5])).toBe(0.0);
  });

  it("is zero for identical samples", () => {
    expect(computeCv([2, 2, 2, 2])).toBeCloseTo(0.0, 12);
  });

  it("rejects empty input", () => {
    expect(() => computeCv([])).toThrow(EmptyInput);
  });

  it("rejects a non-positive mean", () => {
    expect(() => computeCv([0, 0])).toThrow(ZeroMean);
    expect(() => computeCv([-1, 3, -2])).toThrow(ZeroMean);
  });
});

// ---------------------------------------------------------------------------
// effectiveRuntimeRatios
// ---------------------------------------------------------------------------

describe("effectiveRuntimeRatios", () => {
  it("scores against the fastest time", () => {
    expect(effectiveRuntimeRatios([0.5, 1.0])).toEqual([1.0, 2.0]);
  });

  it("keeps mapping keys and marks failures null", () => {
    const out = effectiveRuntimeRatios({ a: 2.0, b: 0.5, c: null });
    expect([...out.keys()]).toEqual(["a", "b", "c"]);
    expect(out.get("a")).toBe(4.0);
    expect(out.get("b")).toBe(1.0);
    expect(out.get("c")).toBeNull();
  });

  it("treats NaN like a failure", () => {
    expect(effectiveRuntimeRatios([NaN, 1.0, 3.0])).toEqual([null, 1.0, 3.0]);
  });

  it("rejects empty input", () => {
    expect(() => effectiveRuntimeRatios([])).toThrow(EmptyInput);
  });

  it("rejects all-failed input", () => {
    expect(() => effectiveRuntimeRatios([null, NaN])).toThrow(AllFailed);
  });

  it("handles a zero minimum time", () => {
    expect(effectiveRuntimeRatios([0.0, 2.0])).toEqual([1.0, Infinity]);
    expect(effectiveRuntimeRatios([0.0, 0.0])).toEqual([1.0, 1.0]);
  });
});

// ---------------------------------------------------------------------------
// CSV parsing
// ---------------------------------------------------------------------------

const CSV_TEXT = [
  "problem_id,rep,planner,success,ee_cost_m,planner_cost,time_s,bound",
  "p00,0,opt,true,0.8125,2.1,0.004,1.0",
  "p00,0,greedy,true,0.9,2.4,0.002,3.0",
  "p00,1,opt,false,,,5.0,",
  "",
].join("\n");

describe("parseBenchCsv", () => {
  it("parses records with nullable cells", () => {
    const recs = parseBenchCsv(CSV_TEXT);
    expect(recs).toHaveLength(3);
    expect(recs[0]).toEqual({
      problemId: "p00",
      rep: 0,
      planner: "opt",
      success: true,
      eeCostM: 0.8125,
      plannerCost: 2.1,
      timeS: 0.004,
      bound: 1.0,
    });
    expect(recs[2].success).toBe(false);
    expect(recs[2].eeCostM).toBeNull();
    expect(recs[2].bound).toBeNull();
    expect(recs[2].timeS).toBe(5.0);
  });

  it("rejects a wrong header", () => {
    expect(() => parseBenchCsv("a,b,c\n1,2,3\n")).toThrow(CsvFormatError);
  });
});

// ---------------------------------------------------------------------------
// summarize
// ---------------------------------------------------------------------------

function rec(
  problemId: string,
  rep: number,
  planner: string,
  success: boolean,
  eeCostM: number | null,
  timeS: number
): BenchRecord {
  return {
    problemId,
    rep,
    planner,
    success,
    eeCostM,
    plannerCost: eeCostM,
    timeS,
    bound: success ? 1.0 : null,
  };
}

describe("summarize", () => {
  const records = [
    rec("p0", 0, "A", true, 1.0, 1.0),
    rec("p0", 0, "B", true, 1.2, 2.0),
    rec("p0", 1, "A", true, 1.0, 1.0),
    rec("p0", 1, "B", false, null, 5.0),
    rec("p1", 0, "A", true, 2.0, 1.0),
    rec("p1", 0, "B", true, 2.4, 2.0),
    rec("p1", 1, "A", false, null, 5.0),
    rec("p1", 1, "B", false, null, 5.0),
  ];

  it("counts queries and successes per planner", () => {
    const s = summarize(records);
    expect(Object.keys(s)).toEqual(["A", "B"]);
    expect(s.A.queries).toBe(4);
    expect(s.A.successes).toBe(3);
    expect(s.A.success_rate_percent).toBeCloseTo(75.0, 9);
    expect(s.B.success_rate_percent).toBeCloseTo(50.0, 9);
  });

  it("averages costs and times over successes only", () => {
    const s = summarize(records);
    expect(s.A.mean_ee_cost_m).toBeCloseTo(4.0 / 3.0, 12);
    expect(s.B.mean_ee_cost_m).toBeCloseTo(1.8, 12);
    expect(s.A.mean_time_s).toBeCloseTo(1.0, 12);
    expect(s.B.mean_time_s).toBeCloseTo(2.0, 12);
  });

  it("skips all-failed groups in the runtime ratios", () => {
    // (p1, 1) has no successful planner, so it contributes no ratios.
    const s = summarize(records);
    expect(s.A.mean_effective_runtime_ratio).toBeCloseTo(1.0, 12);
    expect(s.B.mean_effective_runtime_ratio).toBeCloseTo(2.0, 12);
  });

  it("computes CV per problem and averages", () => {
    const spread = [
      rec("p0", 0, "A", true, 1.0, 1.0),
      rec("p0", 1, "A", true, 2.0, 1.0),
      rec("p0", 2, "A", true, 3.0, 1.0),
    ];
    const s = summarize(spread);
    expect(s.A.mean_cv_percent).toBeCloseTo(40.8248, 3);
    expect(summarize(records).A.mean_cv_percent).toBeCloseTo(0.0, 12);
  });

  it("treats all-zero costs as zero variation", () => {
    const zero = [rec("p0", 0, "A", true, 0.0, 1.0), rec("p0", 1, "A", true, 0.0, 1.0)];
    expect(summarize(zero).A.mean_cv_percent).toBe(0.0);
  });

  it("reports nulls for a planner with no successes", () => {
    const s = summarize([
      rec("p0", 0, "A", true, 1.0, 1.0),
      rec("p0", 0, "B", false, null, 5.0),
    ]);
    expect(s.B.successes).toBe(0);
    expect(s.B.success_rate_percent).toBe(0.0);
    expect(s.B.mean_ee_cost_m).toBeNull();
    expect(s.B.mean_cv_percent).toBeNull();
    expect(s.B.mean_time_s).toBeNull();
    expect(s.B.mean_effective_runtime_ratio).toBeNull();
  });
});

// ---------------------------------------------------------------------------
// summaryTable
// ---------------------------------------------------------------------------

describe("summaryTable", () => {
  it("renders one aligned line per planner with dashes for nulls", () => {
    const s = summarize([
      rec("p0", 0, "A", true, 1.0, 1.0),
      rec("p0", 0, "never", false, null, 5.0),
    ]);
    const lines = summaryTable(s).split("\n");
    expect(lines).toHaveLength(3);
    expect(lines[0].startsWith("planner")).toBe(true);
    for (const col of ["succ%", "ee_cost_m", "cv%", "time_s", "t/tmin"]) {
      expect(lines[0]).toContain(col);
    }
    expect(lines[1].startsWith("A ")).toBe(true);
    expect(lines[1]).toContain("100.0");
    expect(lines[2].startsWith("never ")).toBe(true);
    expect(lines[2]).toContain("0.0");
    expect(lines[2].trim().endsWith("-")).toBe(true);
  });
});
