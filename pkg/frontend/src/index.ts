/**
 * armplan-frontend: typed client, benchmark statistics, and SVG reporting
 * for the armplan planning service.
 */

export { ApiError, PlannerClient } from "./client.js";
export type { BenchRequest, ValidateRequest } from "./client.js";
export {
  AllFailed,
  CSV_COLUMNS,
  CsvFormatError,
  EmptyInput,
  ZeroMean,
  computeCv,
  effectiveRuntimeRatios,
  parseBenchCsv,
  summarize,
  summaryTable,
} from "./stats.js";
export {
  duration,
  jointPathLength,
  metadataNumber,
  parseTrajectory,
  robotNames,
  totalJointLength,
} from "./trajectory.js";
export {
  barChart,
  costChart,
  cvChart,
  runtimeRatioChart,
  summaryCharts,
  timeChart,
} from "./plots.js";
export type { Bar, BarChartOpts } from "./plots.js";
export type {
  AnytimeResult,
  BenchRecord,
  BenchResult,
  Goal,
  ObjectInit,
  PoseInit,
  RobotInit,
  RobotTrack,
  Summary,
  SummaryRow,
  TrajectoryDoc,
} from "./types.js";
