/**
 * The figure kinds regenerated from ethlab CSV output.
 *
 * Every renderer is a pure function Table(s) -> SVG string; no physics is
 * recomputed here beyond the least-squares decay fit used for slope
 * annotations.
 */

import {
  Table,
  distinctValues,
  filterRows,
  numericColumn,
  stringColumn,
} from "./csv.js";
import { FitResult, fitDecay } from "./fit.js";
import { Figure, PALETTE, linearScale, logScale } from "./svg.js";

export type FigureKind =
  | "per_eigenstate_scatter"
  | "decay_vs_N_semilog"
  | "energy_scan"
  | "histogram"
  | "mi_vs_distance";

export interface RenderOptions {
  /** summary column for decay/energy-scan figures */
  column?: string;
  /** restrict to one ensemble label */
  ensemble?: string;
}

function finitePositive(xs: number[], ys: number[]): [number[], number[]] {
  const px: number[] = [];
  const py: number[] = [];
  for (let k = 0; k < xs.length; k++) {
    if (isFinite(xs[k]) && isFinite(ys[k]) && ys[k] > 0) {
      px.push(xs[k]);
      py.push(ys[k]);
    }
  }
  return [px, py];
}

function logRange(values: number[]): [number, number] {
  const pos = values.filter((v) => isFinite(v) && v > 0);
  if (pos.length === 0) throw new Error("no positive values to plot on a log axis");
  return [Math.min(...pos), Math.max(...pos)];
}

/** Fig.-1 style: diagonal and summed off-diagonal measure per eigenstate. */
export function perEigenstateScatter(records: Table, opts: RenderOptions = {}): string {
  const table = opts.ensemble ? filterRows(records, "ensemble", opts.ensemble) : records;
  const idx = numericColumn(table, "i");
  const vdg = numericColumn(table, "v_dg");
  const voff = numericColumn(table, "v_off_sum");
  const fig = new Figure("Diagonal vs summed off-diagonal measure per eigenstate");
  const [lo, hi] = logRange([...vdg, ...voff]);
  const xs = linearScale(Math.min(...idx), Math.max(...idx), "x");
  const ys = logScale(lo, hi, "y");
  fig.axes(xs, ys, "eigenstate index", "measure value");
  const [x1, y1] = finitePositive(idx, vdg);
  fig.scatter(xs, ys, x1, y1, PALETTE[0]);
  const [x2, y2] = finitePositive(idx, voff);
  fig.scatter(xs, ys, x2, y2, PALETTE[1]);
  fig.legend([
    { label: "V_dg", color: PALETTE[0] },
    { label: "sum_j V_off", color: PALETTE[1] },
  ]);
  return fig.render();
}

export interface DecaySeries {
  label: string;
  points: Array<[number, number]>;
  fit: FitResult;
}

/** Shared machinery for the decay figure and its tests. */
export function decaySeries(summaries: Table[], column: string, ensemble?: string): DecaySeries[] {
  const out: DecaySeries[] = [];
  for (const table of summaries) {
    const labels = ensemble ? [ensemble] : distinctValues(table, "ensemble");
    for (const label of labels) {
      const sub = filterRows(table, "ensemble", label);
      if (sub.rows.length === 0) continue;
      const ns = numericColumn(sub, "N");
      const vals = numericColumn(sub, column);
      const hs = stringColumn(sub, "h");
      const points: Array<[number, number]> = [];
      for (let k = 0; k < ns.length; k++) {
        if (isFinite(vals[k]) && vals[k] > 0) points.push([ns[k], vals[k]]);
      }
      if (points.length < 3) continue;
      const name = `${label} (h=${hs[0]})`;
      out.push({ label: name, points, fit: fitDecay(points) });
    }
  }
  if (out.length === 0) throw new Error(`no plottable series for column ${column}`);
  return out;
}

/** Fig.-3/4 style: semilog decay of a summary column vs N with fitted slopes. */
export function decayVsN(summaries: Table[], opts: RenderOptions = {}): string {
  const column = opts.column ?? "vbar_off";
  const series = decaySeries(summaries, column, opts.ensemble);
  const fig = new Figure(`${column} versus N (semilog)`);
  const allN = series.flatMap((s) => s.points.map(([n]) => n));
  const allV = series.flatMap((s) => s.points.map(([, v]) => v));
  const xs = linearScale(Math.min(...allN), Math.max(...allN), "x");
  const ys = logScale(...logRange(allV), "y");
  fig.axes(xs, ys, "N", column);
  series.forEach((s, k) => {
    const color = PALETTE[k % PALETTE.length];
    const px = s.points.map(([n]) => n);
    const py = s.points.map(([, v]) => v);
    fig.scatter(xs, ys, px, py, color, 3.0);
    const fitted = px.map((n) => Math.exp(s.fit.intercept + s.fit.slope * n));
    fig.line(xs, ys, px, fitted, color, true);
    fig.annotation(`${s.label}: slope = ${s.fit.slope.toPrecision(12)} (r2=${s.fit.rSquared.toFixed(4)})`, k);
  });
  fig.legend(series.map((s, k) => ({ label: s.label, color: PALETTE[k % PALETTE.length] })));
  return fig.render();
}

/** Fig.-2(b) style: a summary column against the shell center energy. */
export function energyScan(summaries: Table[], opts: RenderOptions = {}): string {
  const column = opts.column ?? "vbar_dg";
  const fig = new Figure(`${column} versus shell center`);
  const series: Array<{ label: string; x: number[]; y: number[] }> = [];
  for (const table of summaries) {
    const labels = opts.ensemble ? [opts.ensemble] : distinctValues(table, "ensemble");
    for (const label of labels) {
      const sub = filterRows(table, "ensemble", label);
      if (sub.rows.length === 0) continue;
      const centers = numericColumn(sub, "shell_center");
      const vals = numericColumn(sub, column);
      const pairs = centers
        .map((c, k) => [c, vals[k]] as [number, number])
        .filter(([c, v]) => isFinite(c) && isFinite(v))
        .sort((a, b) => a[0] - b[0]);
      if (pairs.length === 0) continue;
      series.push({ label, x: pairs.map((p) => p[0]), y: pairs.map((p) => p[1]) });
    }
  }
  if (series.length === 0) throw new Error(`no plottable series for column ${column}`);
  const allX = series.flatMap((s) => s.x);
  const allY = series.flatMap((s) => s.y);
  const xs = linearScale(Math.min(...allX), Math.max(...allX), "x");
  const ys = logScale(...logRange(allY), "y");
  fig.axes(xs, ys, "shell center E", column);
  series.forEach((s, k) => {
    const color = PALETTE[k % PALETTE.length];
    fig.scatter(xs, ys, s.x, s.y, color, 3.0);
    fig.line(xs, ys, s.x, s.y, color);
  });
  fig.legend(series.map((s, k) => ({ label: s.label, color: PALETTE[k % PALETTE.length] })));
  return fig.render();
}

/** Fig.-5(a/b) style: binned spectral data from a diagnostics histogram CSV. */
export function histogram(table: Table): string {
  const left = numericColumn(table, "bin_left");
  const right = numericColumn(table, "bin_right");
  const name = table.header.includes("count") ? "count" : "mass";
  const values = numericColumn(table, name);
  const fig = new Figure(`Spectral histogram (${name})`);
  const xs = linearScale(Math.min(...left), Math.max(...right), "x");
  const ys = linearScale(0, Math.max(...values) * 1.05, "y");
  fig.axes(xs, ys, "energy", name);
  fig.bars(xs, ys, left, right, values, PALETTE[0]);
  return fig.render();
}

/** Fig.-5(d) style: log mutual information vs separation with fitted slope. */
export function miVsDistance(table: Table): string {
  const d = numericColumn(table, "distance");
  const mi = numericColumn(table, "mutual_information");
  const pairs: Array<[number, number]> = [];
  for (let k = 0; k < d.length; k++) {
    if (isFinite(mi[k]) && mi[k] > 0) pairs.push([d[k], mi[k]]);
  }
  if (pairs.length < 2) throw new Error("need at least two positive mutual-information points");
  const fig = new Figure("Two-site mutual information versus separation");
  const xs = linearScale(Math.min(...pairs.map((p) => p[0])), Math.max(...pairs.map((p) => p[0])), "x");
  const ys = logScale(...logRange(pairs.map((p) => p[1])), "y");
  fig.axes(xs, ys, "site separation", "I(B1, B2)");
  fig.scatter(xs, ys, pairs.map((p) => p[0]), pairs.map((p) => p[1]), PALETTE[0], 3.0);
  fig.line(xs, ys, pairs.map((p) => p[0]), pairs.map((p) => p[1]), PALETTE[0]);
  if (pairs.length >= 3) {
    const fit = fitDecay(pairs);
    fig.annotation(`log-linear slope = ${fit.slope.toPrecision(12)} per site (natural log)`);
  }
  return fig.render();
}

export function render(kind: FigureKind, tables: Table[], opts: RenderOptions = {}): string {
  switch (kind) {
    case "per_eigenstate_scatter":
      return perEigenstateScatter(tables[0], opts);
    case "decay_vs_N_semilog":
      return decayVsN(tables, opts);
    case "energy_scan":
      return energyScan(tables, opts);
    case "histogram":
      return histogram(tables[0]);
    case "mi_vs_distance":
      return miVsDistance(tables[0]);
  }
}
