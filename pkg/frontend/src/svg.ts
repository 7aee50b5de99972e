/**
 * Tiny deterministic SVG scene builder: fixed canvas, fixed fonts, no
 * randomness, so a figure is a pure function of its input table.
 */

export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN = { top: 36, right: 24, bottom: 52, left: 72 };

export interface Scale {
  map(v: number): number;
  ticks(): number[];
  readonly log: boolean;
}

const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

export function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    return String(Number(v.toPrecision(6)));
  }
  return v.toExponential(2);
}

function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const norm = step0 / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

export function linearScale(lo: number, hi: number, axis: "x" | "y"): Scale {
  if (hi === lo) {
    hi = lo + 1;
    lo = lo - 1;
  }
  const map = (v: number) =>
    axis === "x"
      ? MARGIN.left + ((v - lo) / (hi - lo)) * PLOT_W
      : MARGIN.top + PLOT_H - ((v - lo) / (hi - lo)) * PLOT_H;
  return { map, ticks: () => niceTicks(lo, hi), log: false };
}

export function logScale(lo: number, hi: number, axis: "x" | "y"): Scale {
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const inner = linearScale(llo, lhi === llo ? llo + 1 : lhi, axis);
  const ticks = () => {
    const out: number[] = [];
    for (let p = Math.ceil(llo - 1e-9); p <= Math.floor(lhi + 1e-9); p++) {
      out.push(Math.pow(10, p));
    }
    return out.length >= 2 ? out : [lo, hi];
  };
  return { map: (v: number) => inner.map(Math.log10(v)), ticks, log: true };
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

export class Figure {
  private parts: string[] = [];

  constructor(title: string) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
      `<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-size="15">${escapeXml(title)}</text>`,
    );
  }

  axes(xs: Scale, ys: Scale, xlabel: string, ylabel: string): void {
    const x0 = MARGIN.left;
    const x1 = WIDTH - MARGIN.right;
    const y0 = MARGIN.top;
    const y1 = HEIGHT - MARGIN.bottom;
    this.parts.push(
      `<rect x="${x0}" y="${y0}" width="${x1 - x0}" height="${y1 - y0}" fill="none" stroke="#333"/>`,
    );
    for (const t of xs.ticks()) {
      const px = xs.map(t);
      if (px < x0 - 1e-6 || px > x1 + 1e-6) continue;
      this.parts.push(
        `<line x1="${r2(px)}" y1="${y1}" x2="${r2(px)}" y2="${y1 + 5}" stroke="#333"/>`,
        `<text x="${r2(px)}" y="${y1 + 20}" text-anchor="middle" font-size="11">${fmt(t)}</text>`,
      );
    }
    for (const t of ys.ticks()) {
      const py = ys.map(t);
      if (py < y0 - 1e-6 || py > y1 + 1e-6) continue;
      this.parts.push(
        `<line x1="${x0 - 5}" y1="${r2(py)}" x2="${x0}" y2="${r2(py)}" stroke="#333"/>`,
        `<text x="${x0 - 8}" y="${r2(py) + 4}" text-anchor="end" font-size="11">${fmt(t)}</text>`,
      );
    }
    this.parts.push(
      `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-size="13">${escapeXml(xlabel)}</text>`,
      `<text x="18" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 18 ${(y0 + y1) / 2})">${escapeXml(ylabel)}</text>`,
    );
  }

  scatter(xs: Scale, ys: Scale, px: number[], py: number[], color: string, radius = 2.2): void {
    for (let k = 0; k < px.length; k++) {
      if (!isFinite(px[k]) || !isFinite(py[k])) continue;
      this.parts.push(
        `<circle cx="${r2(xs.map(px[k]))}" cy="${r2(ys.map(py[k]))}" r="${radius}" fill="${color}" fill-opacity="0.75"/>`,
      );
    }
  }

  line(xs: Scale, ys: Scale, px: number[], py: number[], color: string, dashed = false): void {
    const pts: string[] = [];
    for (let k = 0; k < px.length; k++) {
      if (!isFinite(px[k]) || !isFinite(py[k])) continue;
      pts.push(`${r2(xs.map(px[k]))},${r2(ys.map(py[k]))}`);
    }
    const dash = dashed ? ` stroke-dasharray="6 4"` : "";
    this.parts.push(
      `<polyline points="${pts.join(" ")}" fill="none" stroke="${color}" stroke-width="1.6"${dash}/>`,
    );
  }

  bars(xs: Scale, ys: Scale, left: number[], right: number[], height: number[], color: string): void {
    const base = HEIGHT - MARGIN.bottom;
    for (let k = 0; k < left.length; k++) {
      const x = xs.map(left[k]);
      const w = xs.map(right[k]) - x;
      const y = ys.map(height[k]);
      this.parts.push(
        `<rect x="${r2(x)}" y="${r2(y)}" width="${r2(Math.max(w, 0))}" height="${r2(Math.max(base - y, 0))}" fill="${color}" fill-opacity="0.65" stroke="#333" stroke-width="0.5"/>`,
      );
    }
  }

  legend(entries: Array<{ label: string; color: string }>): void {
    let y = MARGIN.top + 14;
    for (const { label, color } of entries) {
      this.parts.push(
        `<rect x="${WIDTH - MARGIN.right - 190}" y="${y - 9}" width="10" height="10" fill="${color}"/>`,
        `<text x="${WIDTH - MARGIN.right - 175}" y="${y}" font-size="11">${escapeXml(label)}</text>`,
      );
      y += 16;
    }
  }

  annotation(text: string, slot = 0): void {
    this.parts.push(
      `<text x="${MARGIN.left + 10}" y="${MARGIN.top + 16 + 15 * slot}" font-size="12" fill="#222">${escapeXml(text)}</text>`,
    );
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

function r2(v: number): string {
  return (Math.round(v * 100) / 100).toFixed(2);
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
