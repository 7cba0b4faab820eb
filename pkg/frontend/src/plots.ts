/**
 * SVG bar charts for benchmark summaries.
 *
 * Self-contained string templating, no DOM or plotting dependency; the
 * output opens in any browser and embeds cleanly in reports.
 */

import type { Summary } from "./types.js";

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/** One bar: a planner label, its value, and a small annotation line. */
export interface Bar {
  label: string;
  value: number | null;
  annotation?: string;
}

export interface BarChartOpts {
  title: string;
  subtitle?: string;
  yLabel: string;
  bars: Bar[];
  color?: string;
  yFormat?: (v: number) => string;
}

// ---------------------------------------------------------------------------
// SVG helpers
// ---------------------------------------------------------------------------

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const nice = [1, 2, 5, 10].map((m) => m * mag);
  const step = nice.find((n) => n >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 0.01; v += step) ticks.push(v);
  return ticks;
}

// ---------------------------------------------------------------------------
// Generic bar chart
// ---------------------------------------------------------------------------

export function barChart(opts: BarChartOpts): string {
  const { bars } = opts;
  const color = opts.color ?? "#4361ee";
  const yFmt = opts.yFormat ?? ((v: number) => (v % 1 === 0 ? String(v) : v.toFixed(2)));

  // Layout
  const W = 560, H = 260;
  const ml = 60, mr = 16, mt = 34, mb = 46;
  const pw = W - ml - mr;
  const ph = H - mt - mb;

  const vals = bars.map((b) => b.value).filter((v): v is number => v !== null);
  const yMax = (vals.length > 0 ? Math.max(...vals) : 1) * 1.12 || 1;
  const yOf = (v: number) => mt + ph - (v / yMax) * ph;

  const slot = pw / Math.max(1, bars.length);
  const bw = Math.min(52, slot * 0.6);

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;
  s += `<text x="${ml}" y="${mt - 18}" font-size="11" font-weight="600" fill="#222">${esc(opts.title)}</text>\n`;
  if (opts.subtitle) {
    s += `<text x="${ml}" y="${mt - 7}" font-size="7.5" fill="#888">${esc(opts.subtitle)}</text>\n`;
  }

  // Grid + left ticks
  for (const v of niceTicks(0, yMax, 5)) {
    const y = yOf(v);
    s += `<line x1="${ml}" y1="${y.toFixed(1)}" x2="${ml + pw}" y2="${y.toFixed(1)}" stroke="#eee" stroke-width="0.5"/>\n`;
    s += `<text x="${ml - 5}" y="${(y + 3).toFixed(1)}" text-anchor="end" font-size="7" fill="#666">${esc(yFmt(v))}</text>\n`;
  }

  // Bars with value and annotation labels
  bars.forEach((bar, i) => {
    const cx = ml + slot * (i + 0.5);
    if (bar.value === null) {
      s += `<text x="${cx.toFixed(1)}" y="${(mt + ph - 6).toFixed(1)}" text-anchor="middle" font-size="8" fill="#999">n/a</text>\n`;
    } else {
      const y = yOf(bar.value);
      s += `<rect x="${(cx - bw / 2).toFixed(1)}" y="${y.toFixed(1)}" width="${bw.toFixed(1)}" height="${(mt + ph - y).toFixed(1)}" fill="${color}" opacity="0.85"/>\n`;
      s += `<text x="${cx.toFixed(1)}" y="${(y - 4).toFixed(1)}" text-anchor="middle" font-size="7.5" fill="#333">${esc(yFmt(bar.value))}</text>\n`;
    }
    s += `<text x="${cx.toFixed(1)}" y="${mt + ph + 12}" text-anchor="middle" font-size="8" fill="#333">${esc(bar.label)}</text>\n`;
    if (bar.annotation) {
      s += `<text x="${cx.toFixed(1)}" y="${mt + ph + 22}" text-anchor="middle" font-size="6.5" fill="#888">${esc(bar.annotation)}</text>\n`;
    }
  });

  // Axes frame + Y label
  s += `<line x1="${ml}" y1="${mt}" x2="${ml}" y2="${mt + ph}" stroke="#333" stroke-width="0.7"/>\n`;
  s += `<line x1="${ml}" y1="${mt + ph}" x2="${ml + pw}" y2="${mt + ph}" stroke="#333" stroke-width="0.7"/>\n`;
  s += `<text x="12" y="${mt + ph / 2}" text-anchor="middle" font-size="8" fill="#444" transform="rotate(-90,12,${mt + ph / 2})">${esc(opts.yLabel)}</text>\n`;

  s += `</svg>\n`;
  return s;
}

// ---------------------------------------------------------------------------
// Summary charts
// ---------------------------------------------------------------------------

type MetricKey = "mean_ee_cost_m" | "mean_cv_percent" | "mean_time_s" | "mean_effective_runtime_ratio";

function metricBars(summary: Summary, metric: MetricKey, extra?: (planner: string) => string): Bar[] {
  return Object.keys(summary)
    .sort()
    .map((planner) => {
      const row = summary[planner];
      const succ = `succ ${row.success_rate_percent.toFixed(0)}%`;
      const tail = extra ? `  ${extra(planner)}` : "";
      return { label: planner, value: row[metric], annotation: succ + tail };
    });
}

/** Mean end-effector path cost per planner, annotated with succ% and CV%. */
export function costChart(summary: Summary, subtitle?: string): string {
  const bars = metricBars(summary, "mean_ee_cost_m", (planner) => {
    const cv = summary[planner].mean_cv_percent;
    return `cv ${cv === null ? "-" : `${cv.toFixed(2)}%`}`;
  });
  return barChart({
    title: "Mean end-effector path cost",
    subtitle,
    yLabel: "ee cost (m)",
    bars,
    yFormat: (v) => v.toFixed(3),
  });
}

/** Mean per-problem cost CV per planner (consistency across repetitions). */
export function cvChart(summary: Summary, subtitle?: string): string {
  return barChart({
    title: "Solution cost consistency",
    subtitle,
    yLabel: "cv (%)",
    bars: metricBars(summary, "mean_cv_percent"),
    color: "#9d4edd",
    yFormat: (v) => v.toFixed(2),
  });
}

/** Mean planning time over successful queries per planner. */
export function timeChart(summary: Summary, subtitle?: string): string {
  return barChart({
    title: "Mean planning time",
    subtitle,
    yLabel: "time (s)",
    bars: metricBars(summary, "mean_time_s"),
    color: "#e63946",
    yFormat: (v) => v.toFixed(3),
  });
}

/** Mean effective runtime ratio (t / t_min) per planner. */
export function runtimeRatioChart(summary: Summary, subtitle?: string): string {
  const bars = metricBars(summary, "mean_effective_runtime_ratio", (planner) => {
    const t = summary[planner].mean_time_s;
    return `mean time ${t === null ? "-" : `${t.toFixed(3)}s`}`;
  });
  return barChart({
    title: "Effective runtime ratio",
    subtitle,
    yLabel: "t / t_min",
    bars,
    color: "#2d6a4f",
    yFormat: (v) => v.toFixed(2),
  });
}

/** All four metric charts keyed by a short file-friendly name. */
export function summaryCharts(summary: Summary, subtitle?: string): Record<string, string> {
  return {
    cost: costChart(summary, subtitle),
    cv: cvChart(summary, subtitle),
    time: timeChart(summary, subtitle),
    ratio: runtimeRatioChart(summary, subtitle),
  };
}
