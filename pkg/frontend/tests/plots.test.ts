/**
 * Unit tests for the SVG chart builders.
 */

import { describe, expect, it } from "vitest";
import { barChart, costChart, runtimeRatioChart, summaryCharts } from "../src/plots.js";
import type { Summary } from "../src/types.js";

const SUMMARY: Summary = {
  wastar_w1: {
    queries: 4,
    successes: 4,
    success_rate_percent: 100.0,
    mean_ee_cost_m: 0.91,
    mean_cv_percent: 0.0,
    mean_time_s: 0.012,
    mean_effective_runtime_ratio: 1.8,
  },
  wastar_w3: {
    queries: 4,
    successes: 2,
    success_rate_percent: 50.0,
    mean_ee_cost_m: 1.05,
    mean_cv_percent: 2.5,
    mean_time_s: 0.004,
    mean_effective_runtime_ratio: 1.0,
  },
  never: {
    queries: 4,
    successes: 0,
    success_rate_percent: 0.0,
    mean_ee_cost_m: null,
    mean_cv_percent: null,
    mean_time_s: null,
    mean_effective_runtime_ratio: null,
  },
};

describe("barChart", () => {
  it("produces a closed SVG document with labels", () => {
    const svg = barChart({
      title: "demo",
      yLabel: "cost",
      bars: [
        { label: "a", value: 1.0, annotation: "note" },
        { label: "b", value: null },
      ],
    });
    expect(svg.startsWith("<svg ")).toBe(true);
    expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
    expect(svg).toContain(">a<");
    expect(svg).toContain(">note<");
    expect(svg).toContain(">n/a<");
  });

  it("escapes markup in text", () => {
    const svg = barChart({ title: "a < b & c", yLabel: "y", bars: [] });
    expect(svg).toContain("a &lt; b &amp; c");
    expect(svg).not.toContain("a < b & c");
  });
});

describe("summary charts", () => {
  it("annotates the cost chart with success rate and CV", () => {
    const svg = costChart(SUMMARY, "4 runs");
    for (const name of ["wastar_w1", "wastar_w3", "never"]) {
      expect(svg).toContain(name);
    }
    expect(svg).toContain("succ 100%  cv 0.00%");
    expect(svg).toContain("succ 50%  cv 2.50%");
    expect(svg).toContain("succ 0%  cv -");
    expect(svg).toContain("4 runs");
  });

  it("annotates the ratio chart with mean times", () => {
    const svg = runtimeRatioChart(SUMMARY);
    expect(svg).toContain("t / t_min");
    expect(svg).toContain("mean time 0.012s");
    expect(svg).toContain("mean time -");
    expect(svg).toContain(">n/a<");
  });

  it("bundles one chart per metric, each annotated with success rates", () => {
    const charts = summaryCharts(SUMMARY, "demo run");
    expect(Object.keys(charts).sort()).toEqual(["cost", "cv", "ratio", "time"]);
    for (const svg of Object.values(charts)) {
      expect(svg.startsWith("<svg ")).toBe(true);
      expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
      expect(svg).toContain("succ 100%");
      expect(svg).toContain("succ 0%");
      expect(svg).toContain("demo run");
    }
    expect(charts.cv).toContain("cv (%)");
    expect(charts.time).toContain("time (s)");
  });
});
