/** Figure model shared by the SVG renderer and the tests: everything is laid
 * out in data coordinates here and projected to pixels by pure scales, so
 * geometric claims (points on a guide line) can be checked without parsing
 * markup. */

export interface Point {
  x: number;
  y: number;
  /** half-height of the error bar in y units; omitted -> no bar */
  err?: number;
}

export interface Series {
  label: string;
  color: string;
  dashed?: boolean;
  marker?: "circle" | "square" | "none";
  points: Point[];
}

export interface Figure {
  title: string;
  xLabel: string;
  yLabel: string;
  /** tick positions in data coordinates with display labels */
  xTicks: { v: number; label: string }[];
  yTicks: { v: number; label: string }[];
  xRange: [number, number];
  yRange: [number, number];
  series: Series[];
}

export interface Layout {
  width: number;
  height: number;
  margin: { left: number; right: number; top: number; bottom: number };
}

export const DEFAULT_LAYOUT: Layout = {
  width: 880,
  height: 600,
  margin: { left: 72, right: 24, top: 44, bottom: 56 },
};

export function xScale(fig: Figure, layout: Layout = DEFAULT_LAYOUT) {
  const [lo, hi] = fig.xRange;
  const { left, right } = layout.margin;
  const span = layout.width - left - right;
  return (v: number) => left + ((v - lo) / (hi - lo)) * span;
}

export function yScale(fig: Figure, layout: Layout = DEFAULT_LAYOUT) {
  const [lo, hi] = fig.yRange;
  const { top, bottom } = layout.margin;
  const span = layout.height - top - bottom;
  return (v: number) => layout.height - bottom - ((v - lo) / (hi - lo)) * span;
}

/** Round range endpoints outward to a tidy step and emit ticks. */
export function niceTicks(lo: number, hi: number, target = 6): { v: number; label: string }[] {
  if (!(hi > lo)) {
    const pad = Math.abs(lo) > 1e-12 ? Math.abs(lo) * 0.1 : 1.0;
    return niceTicks(lo - pad, hi + pad, target);
  }
  const rawStep = (hi - lo) / target;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * mag).find((s) => s >= rawStep) ?? 10 * mag;
  const first = Math.ceil(lo / step) * step;
  const ticks: { v: number; label: string }[] = [];
  for (let v = first; v <= hi + 1e-9 * step; v += step) {
    const clean = Math.abs(v) < 1e-12 ? 0 : v;
    ticks.push({ v: clean, label: formatTick(clean, step) });
  }
  return ticks;
}

function formatTick(v: number, step: number): string {
  const decimals = Math.max(0, -Math.floor(Math.log10(step)) + (step < 1 ? 1 : 0));
  return v.toFixed(Math.min(decimals, 6));
}

export function padRange(values: number[], frac = 0.08): [number, number] {
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const pad = (hi - lo || Math.max(1, Math.abs(hi))) * frac;
  return [lo - pad, hi + pad];
}
