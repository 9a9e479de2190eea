// Metrics dashboard: per-round table plus line charts against labels spent.
// Table cells carry the service's values verbatim, no rounding.

import { ApiClient } from "./api.js";
import { chartSeries, polylinePoints, tableRows } from "./dashboard.js";
import { HistoryDoc } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const CHART_W = 420;
const CHART_H = 160;
const SERIES: Array<{ key: string; label: string; color: string }> = [
  { key: "acc", label: "accuracy", color: "#6fc2ff" },
  { key: "edit", label: "edit", color: "#ffb86b" },
  { key: "f1_50", label: "f1@50", color: "#9cf29c" },
];

export class HistoryView {
  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private experiment: string,
  ) {}

  async refresh(): Promise<void> {
    const doc = this.root.ownerDocument;
    this.root.textContent = "";
    let history: HistoryDoc;
    try {
      history = await this.api.history(this.experiment);
    } catch (err) {
      const p = doc.createElement("p");
      p.className = "error";
      p.textContent = err instanceof Error ? err.message : String(err);
      this.root.appendChild(p);
      return;
    }
    if (history.rounds.length === 0) {
      const p = doc.createElement("p");
      p.className = "muted empty";
      p.textContent = "no completed rounds yet";
      this.root.appendChild(p);
      return;
    }
    this.root.appendChild(this.table(history));
    this.root.appendChild(this.chart(history));
  }

  private table(history: HistoryDoc): HTMLElement {
    const doc = this.root.ownerDocument;
    const table = doc.createElement("table");
    table.className = "history";
    const head = doc.createElement("tr");
    for (const name of [
      "round",
      "labeled before",
      "labeled after",
      "acc",
      "edit",
      "f1@10",
      "f1@25",
      "f1@50",
      "stop",
    ]) {
      const th = doc.createElement("th");
      th.textContent = name;
      head.appendChild(th);
    }
    table.appendChild(head);

    for (const row of tableRows(history)) {
      const tr = doc.createElement("tr");
      const cells = [
        row.round,
        row.labeledBefore,
        row.labeledAfter,
        row.acc,
        row.edit,
        row.f1_10,
        row.f1_25,
        row.f1_50,
        row.stopReason ?? "",
      ];
      for (const value of cells) {
        const td = doc.createElement("td");
        td.textContent = value === null ? "" : String(value);
        tr.appendChild(td);
      }
      table.appendChild(tr);
    }
    return table;
  }

  private chart(history: HistoryDoc): HTMLElement {
    const doc = this.root.ownerDocument;
    const wrap = doc.createElement("div");
    wrap.className = "chart";

    const svg = doc.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${CHART_W} ${CHART_H}`);
    svg.setAttribute("width", String(CHART_W));
    svg.setAttribute("height", String(CHART_H));

    const frame = doc.createElementNS(SVG_NS, "rect");
    frame.setAttribute("x", "0");
    frame.setAttribute("y", "0");
    frame.setAttribute("width", String(CHART_W));
    frame.setAttribute("height", String(CHART_H));
    frame.setAttribute("class", "chart-frame");
    svg.appendChild(frame);

    for (const s of SERIES) {
      const pts = chartSeries(history, s.key);
      const line = doc.createElementNS(SVG_NS, "polyline");
      line.setAttribute("points", polylinePoints(pts, CHART_W, CHART_H));
      line.setAttribute("fill", "none");
      line.setAttribute("stroke", s.color);
      line.setAttribute("stroke-width", "2");
      line.setAttribute("data-series", s.key);
      svg.appendChild(line);
    }
    wrap.appendChild(svg);

    const legend = doc.createElement("p");
    legend.className = "muted";
    const spent = history.rounds.map((r) => r.labeled_after);
    legend.textContent =
      SERIES.map((s) => s.label).join(" / ") + ` vs labels spent (${spent.join(", ")})`;
    wrap.appendChild(legend);
    return wrap;
  }
}
