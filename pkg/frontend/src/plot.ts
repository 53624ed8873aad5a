import type { SweepRow } from "./csv.js";
import { CsvFormatError } from "./csv.js";
import { Figure, Series, niceTicks, padRange } from "./model.js";

export type FigureKind = "tau_sweep" | "antenna_sweep";

export interface PlotSpec {
  kind: FigureKind;
  title?: string;
  xLabel?: string;
  yLabel?: string;
  /** rows with rate_se above this (bpcu) get error bars */
  seThreshold?: number;
}

const PALETTE = ["#1f6fb4", "#d1495b", "#2e8b57", "#8a5fbf", "#c47f1d", "#3aa6a6"];
/** rate standard error (bpcu) to a power error (dB) via the log2 slope */
const DB_PER_BPCU = 3.0103;

function errBar(row: SweepRow, threshold: number): number | undefined {
  const half = 2 * row.rate_se * DB_PER_BPCU;
  return row.rate_se > threshold ? half : undefined;
}

/** Minimum power vs block length, one curve per channel length L, with the
 * zero-forcing reference drawn as a dashed horizontal per L. */
export function tauFigure(rows: SweepRow[], spec: PlotSpec): Figure {
  requireSweepVar(rows, "tau", "tau_sweep");
  const threshold = spec.seThreshold ?? 0.005;
  const byL = groupBy(rows, (r) => r.L);
  const taus = rows.map((r) => r.tau);
  const xRange: [number, number] = padRange(taus, 0.05);
  const series: Series[] = [];
  [...byL.entries()].forEach(([L, group], i) => {
    const color = PALETTE[i % PALETTE.length];
    const sorted = [...group].sort((a, b) => a.tau - b.tau);
    series.push({
      label: `CE, L=${L}`,
      color,
      marker: "circle",
      points: sorted.map((r) => ({ x: r.tau, y: r.ce_min_db, err: errBar(r, threshold) })),
    });
    const zf = mean(sorted.map((r) => r.zf_min_db));
    series.push({
      label: `ZF, L=${L}`,
      color,
      dashed: true,
      marker: "none",
      points: [
        { x: xRange[0], y: zf },
        { x: xRange[1], y: zf },
      ],
    });
  });
  const ys = series.flatMap((s) => s.points.map((p) => p.y));
  const yRange = padRange(ys);
  return {
    title: spec.title ?? "Minimum power for the target per-user rate vs block length",
    xLabel: spec.xLabel ?? "block length tau (channel uses)",
    yLabel: spec.yLabel ?? "minimum P_T/sigma^2 (dB)",
    xTicks: uniqueSorted(taus).map((v) => ({ v, label: String(v) })),
    yTicks: niceTicks(yRange[0], yRange[1]),
    xRange,
    yRange,
    series,
  };
}

/** Minimum power vs antenna count on a log2 axis, with a -3 dB per doubling
 * guide anchored at the first CE point. */
export function antennaFigure(rows: SweepRow[], spec: PlotSpec): Figure {
  requireSweepVar(rows, "N", "antenna_sweep");
  const threshold = spec.seThreshold ?? 0.005;
  const sorted = [...rows].sort((a, b) => a.N - b.N);
  const x = (n: number) => Math.log2(n);
  const xRange: [number, number] = padRange(sorted.map((r) => x(r.N)), 0.05);
  const ce: Series = {
    label: "CE precoder",
    color: PALETTE[0],
    marker: "circle",
    points: sorted.map((r) => ({ x: x(r.N), y: r.ce_min_db, err: errBar(r, threshold) })),
  };
  const zf: Series = {
    label: "ZF (total average power)",
    color: PALETTE[1],
    marker: "square",
    points: sorted.map((r) => ({ x: x(r.N), y: r.zf_min_db })),
  };
  const guide: Series = {
    label: "-3 dB per doubling",
    color: "#777777",
    dashed: true,
    marker: "none",
    points: [xRange[0], xRange[1]].map((gx) => ({
      x: gx,
      y: guideLineY(sorted, gx),
    })),
  };
  const ys = [...ce.points, ...zf.points, ...guide.points].map((p) => p.y);
  const yRange = padRange(ys);
  return {
    title: spec.title ?? "Minimum power for the target per-user rate vs antennas",
    xLabel: spec.xLabel ?? "base-station antennas N (log scale)",
    yLabel: spec.yLabel ?? "minimum P_T/sigma^2 (dB)",
    xTicks: sorted.map((r) => ({ v: x(r.N), label: String(r.N) })),
    yTicks: niceTicks(yRange[0], yRange[1]),
    xRange,
    yRange,
    series: [guide, ce, zf],
  };
}

/** Guide value at x = log2(N): anchored on the first CE point, -3 dB per unit. */
export function guideLineY(sorted: SweepRow[], xLog2: number): number {
  const x0 = Math.log2(sorted[0].N);
  return sorted[0].ce_min_db - 3.0 * (xLog2 - x0);
}

export function buildFigure(rows: SweepRow[], spec: PlotSpec): Figure {
  return spec.kind === "tau_sweep" ? tauFigure(rows, spec) : antennaFigure(rows, spec);
}

function requireSweepVar(rows: SweepRow[], expected: string, kind: string) {
  if (rows.length === 0) {
    throw new CsvFormatError("no data rows");
  }
  const bad = rows.find((r) => r.sweep_var !== expected);
  if (bad) {
    throw new CsvFormatError(
      `figure kind ${kind} needs sweep_var=${expected}, found "${bad.sweep_var}"`,
    );
  }
}

function groupBy<T, K>(items: T[], key: (t: T) => K): Map<K, T[]> {
  const out = new Map<K, T[]>();
  for (const item of items) {
    const k = key(item);
    const bucket = out.get(k);
    if (bucket) {
      bucket.push(item);
    } else {
      out.set(k, [item]);
    }
  }
  return out;
}

const mean = (xs: number[]) => xs.reduce((a, b) => a + b, 0) / xs.length;
const uniqueSorted = (xs: number[]) => [...new Set(xs)].sort((a, b) => a - b);
