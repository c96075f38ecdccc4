/**
 * Figure assembly for the two supported kinds:
 *
 * - "sweep": consumes the harness summary CSV
 *   (model,scheme,axis,value,n_trials,mean_r_s_bps_hz,stderr_r_s_bps_hz);
 *   one line per (model, scheme) with a +-1 standard-error band.
 * - "convergence": consumes the per-iteration trace CSV
 *   (model,scheme,trial,seed,k,psi_rad,r_s_bps_hz,r_s_design_bps_hz,...);
 *   one line per (model, scheme), requiring a single trial per group so no
 *   aggregation ever happens in the plot layer.
 *
 * The plotted series values are carried verbatim from the CSV into the
 * SVG's metadata block, so downstream checks can verify exactness.
 */

import { writeFileSync } from "node:fs";
import { CsvError, loadCsv, num, requireColumns, Table } from "./csv.js";
import { linearScale, padded } from "./scale.js";
import { SvgDoc } from "./svg.js";

export type FigureKind = "convergence" | "sweep";

export interface PlotSpec {
  csvPath: string;
  kind: FigureKind;
  xColumn: string;
  outPath: string;
  dpi?: number;
}

export interface Series {
  label: string;
  x: number[];
  y: number[];
  /** one-standard-error half width per point (sweep kind only) */
  band?: number[];
}

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

const AXIS_LABELS: Record<string, string> = {
  Pmax_dBm: "maximum transmit power P_max (dBm)",
  N: "total antenna elements N",
  M: "colluding eavesdroppers M",
  kappa: "pattern sharpness factor kappa",
  xi: "CSI error factor xi (unitless)",
  k: "AO iteration k",
  value: "sweep value",
  psi_rad: "shape parameter psi (radians)",
};

export function axisLabel(column: string, table?: Table): string {
  if (column === "value" && table !== undefined) {
    const axes = new Set(table.rows.map((r) => r.axis));
    if (axes.size === 1) {
      const axis = [...axes][0];
      if (axis && AXIS_LABELS[axis]) {
        return AXIS_LABELS[axis];
      }
    }
  }
  return AXIS_LABELS[column] ?? column;
}

export function extractSweepSeries(table: Table, xColumn: string, path: string): Series[] {
  requireColumns(table, ["model", "scheme", xColumn, "mean_r_s_bps_hz", "stderr_r_s_bps_hz"], path);
  const groups = new Map<string, Series>();
  for (const row of table.rows) {
    const label = `${row.model}/${row.scheme}`;
    let series = groups.get(label);
    if (!series) {
      series = { label, x: [], y: [], band: [] };
      groups.set(label, series);
    }
    series.x.push(num(row, xColumn, path));
    series.y.push(num(row, "mean_r_s_bps_hz", path));
    series.band!.push(num(row, "stderr_r_s_bps_hz", path));
  }
  const list = [...groups.values()];
  for (const s of list) {
    const order = s.x.map((_, i) => i).sort((a, b) => s.x[a] - s.x[b]);
    s.x = order.map((i) => s.x[i]);
    s.y = order.map((i) => s.y[i]);
    s.band = order.map((i) => s.band![i]);
  }
  if (list.length === 0) {
    throw new CsvError(`CSV ${path}: no (model, scheme) groups found`);
  }
  return list;
}

export function extractConvergenceSeries(table: Table, xColumn: string, path: string): Series[] {
  requireColumns(table, ["model", "scheme", "trial", xColumn, "r_s_bps_hz"], path);
  const groups = new Map<string, Series>();
  const trials = new Map<string, Set<string>>();
  for (const row of table.rows) {
    const label = `${row.model}/${row.scheme}`;
    let series = groups.get(label);
    if (!series) {
      series = { label, x: [], y: [] };
      groups.set(label, series);
      trials.set(label, new Set());
    }
    trials.get(label)!.add(row.trial);
    series.x.push(num(row, xColumn, path));
    series.y.push(num(row, "r_s_bps_hz", path));
  }
  for (const [label, seen] of trials) {
    if (seen.size > 1) {
      throw new CsvError(
        `CSV ${path}: group ${label} holds ${seen.size} trials; the plot ` +
          `layer never aggregates, give it a single-trial trace`,
      );
    }
  }
  const list = [...groups.values()];
  for (const s of list) {
    const order = s.x.map((_, i) => i).sort((a, b) => s.x[a] - s.x[b]);
    s.x = order.map((i) => s.x[i]);
    s.y = order.map((i) => s.y[i]);
  }
  return list;
}

export function renderFigure(spec: PlotSpec): string {
  const table = loadCsv(spec.csvPath);
  const series =
    spec.kind === "sweep"
      ? extractSweepSeries(table, spec.xColumn, spec.csvPath)
      : extractConvergenceSeries(table, spec.xColumn, spec.csvPath);

  const dpi = spec.dpi ?? 96;
  const width = Math.round(6.8 * dpi);
  const height = Math.round(4.6 * dpi);
  const margin = { left: 72, right: 200, top: 42, bottom: 56 };

  const allX = series.flatMap((s) => s.x);
  const allY = series.flatMap((s, _) =>
    s.band ? s.y.flatMap((y, i) => [y - s.band![i], y + s.band![i]]) : s.y,
  );
  const xs = linearScale(padded(Math.min(...allX), Math.max(...allX)), [
    margin.left,
    width - margin.right,
  ]);
  const ys = linearScale(padded(Math.min(...allY, 0), Math.max(...allY)), [
    height - margin.bottom,
    margin.top,
  ]);

  const doc = new SvgDoc(width, height);
  doc.metadata({
    kind: spec.kind,
    x_column: spec.xColumn,
    series: series.map((s) => ({ label: s.label, x: s.x, y: s.y, stderr: s.band ?? null })),
  });

  // frame and grid
  const x0 = margin.left;
  const x1 = width - margin.right;
  const y0 = height - margin.bottom;
  const y1 = margin.top;
  for (const t of ys.ticks) {
    const y = ys.map(t);
    doc.line(x0, y, x1, y, "#dddddd");
    doc.text(x0 - 8, y + 4, tickText(t), { anchor: "end", size: 11 });
  }
  for (const t of xs.ticks) {
    const x = xs.map(t);
    doc.line(x, y0, x, y0 + 5, "#222222");
    doc.text(x, y0 + 18, tickText(t), { anchor: "middle", size: 11 });
  }
  doc.line(x0, y0, x1, y0, "#222222", 1.5);
  doc.line(x0, y0, x0, y1, "#222222", 1.5);

  // axis labels with units
  doc.text((x0 + x1) / 2, height - 14, axisLabel(spec.xColumn, table), {
    anchor: "middle",
    size: 13,
  });
  doc.text(20, (y0 + y1) / 2, "secrecy rate R_s (bps/Hz)", {
    anchor: "middle",
    size: 13,
    rotate: -90,
  });
  const title =
    spec.kind === "sweep" ? "mean secrecy rate with +-1 SE band" : "AO convergence trace";
  doc.text((x0 + x1) / 2, 24, title, { anchor: "middle", size: 14 });

  // series
  series.forEach((s, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    if (s.band) {
      const upper = s.x.map((x, i): [number, number] => [xs.map(x), ys.map(s.y[i] + s.band![i])]);
      const lower = s.x
        .map((x, i): [number, number] => [xs.map(x), ys.map(s.y[i] - s.band![i])])
        .reverse();
      doc.polygon([...upper, ...lower], color);
    }
    const pts = s.x.map((x, i): [number, number] => [xs.map(x), ys.map(s.y[i])]);
    doc.polyline(pts, color);
    for (const [px, py] of pts) {
      doc.circle(px, py, 2.5, color);
    }
    const ly = margin.top + 16 + idx * 18;
    doc.line(x1 + 12, ly - 4, x1 + 34, ly - 4, color, 3);
    doc.text(x1 + 40, ly, s.label, { size: 12 });
  });

  const svg = doc.toString();
  writeFileSync(spec.outPath, svg, "utf-8");
  return svg;
}

function tickText(t: number): string {
  const rounded = Math.round(t * 1e6) / 1e6;
  return String(rounded);
}
