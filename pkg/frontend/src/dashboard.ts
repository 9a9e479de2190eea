// View models for the history dashboard: a pass-through table (values are
// shown exactly as the service reports them) and line-chart series whose
// x axis is the cumulative number of labels spent.

import { HistoryDoc, RoundRow } from "./types.js";

export interface TableRow {
  round: number;
  labeledBefore: number;
  labeledAfter: number;
  acc: number;
  edit: number;
  f1_10: number | null;
  f1_25: number | null;
  f1_50: number | null;
  stopReason: string | null;
}

function f1(report: RoundRow["report"], key: string): number | null {
  const v = report[key];
  return typeof v === "number" ? v : null;
}

export function tableRows(doc: HistoryDoc): TableRow[] {
  return doc.rounds.map((r) => ({
    round: r.round,
    labeledBefore: r.labeled_before,
    labeledAfter: r.labeled_after,
    acc: r.report.acc,
    edit: r.report.edit,
    f1_10: f1(r.report, "f1_10"),
    f1_25: f1(r.report, "f1_25"),
    f1_50: f1(r.report, "f1_50"),
    stopReason: r.stop_reason,
  }));
}

export interface Point {
  x: number;
  y: number;
}

/** One metric as points of (labels spent so far, metric value). */
export function chartSeries(doc: HistoryDoc, metricKey: string): Point[] {
  const pts: Point[] = [];
  for (const r of doc.rounds) {
    const v = metricKey === "acc" || metricKey === "edit" ? r.report[metricKey] : f1(r.report, metricKey);
    if (typeof v === "number") pts.push({ x: r.labeled_after, y: v });
  }
  return pts;
}

/** Map points into SVG polyline coordinates inside a width x height box. */
export function polylinePoints(
  pts: Point[],
  width: number,
  height: number,
  yMax = 100,
): string {
  if (pts.length === 0) return "";
  const xs = pts.map((p) => p.x);
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const span = xHi - xLo || 1;
  return pts
    .map((p) => {
      const x = ((p.x - xLo) / span) * width;
      const y = height - (Math.max(0, Math.min(yMax, p.y)) / yMax) * height;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
}
