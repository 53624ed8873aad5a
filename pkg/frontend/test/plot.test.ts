import { mkdtempSync, readFileSync, statSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { CSV_HEADER, SweepRow, parseSweepCsv } from "../src/csv.js";
import { xScale, yScale } from "../src/model.js";
import { antennaFigure, buildFigure, guideLineY, tauFigure } from "../src/plot.js";
import { renderSvg } from "../src/svg.js";
import { outputPaths, run } from "../src/cli.js";

const HEADER = CSV_HEADER.join(",");

function antennaRows(ns: number[], anchorDb = 0, slope = -3): SweepRow[] {
  return ns.map((n) => ({
    sweep_var: "N",
    L: 2,
    tau: 6,
    N: n,
    M: 4,
    E_star: 2,
    ce_min_db: anchorDb + slope * Math.log2(n / ns[0]),
    zf_min_db: anchorDb - 1 + slope * Math.log2(n / ns[0]),
    gap_db: 1,
    rate_se: 0.001,
  }));
}

function tauRows(): SweepRow[] {
  return [1, 2, 3].flatMap((L) =>
    [L, 2 * L, 3 * L].map((tau) => ({
      sweep_var: "tau",
      L,
      tau,
      N: 32,
      M: 4,
      E_star: 2,
      ce_min_db: 1 - 0.3 * Math.log2(tau / L) - 0.1 * L,
      zf_min_db: -1.5,
      gap_db: 2,
      rate_se: 0.02,
    })),
  );
}

describe("figure construction", () => {
  it("groups tau curves by L with a dashed ZF reference each", () => {
    const fig = tauFigure(tauRows(), { kind: "tau_sweep" });
    const ce = fig.series.filter((s) => s.label.startsWith("CE"));
    const zf = fig.series.filter((s) => s.label.startsWith("ZF"));
    expect(ce).toHaveLength(3);
    expect(zf).toHaveLength(3);
    expect(zf.every((s) => s.dashed)).toBe(true);
    expect(zf.every((s) => s.points[0].y === s.points[1].y)).toBe(true);
  });

  it("draws error bars only above the threshold", () => {
    const fig = tauFigure(tauRows(), { kind: "tau_sweep", seThreshold: 0.05 });
    const ce = fig.series.filter((s) => s.label.startsWith("CE"));
    expect(ce.every((s) => s.points.every((p) => p.err === undefined))).toBe(true);
    const figBars = tauFigure(tauRows(), { kind: "tau_sweep", seThreshold: 0.005 });
    const withBars = figBars.series.filter((s) => s.label.startsWith("CE"));
    expect(withBars.some((s) => s.points.some((p) => p.err !== undefined))).toBe(true);
  });

  it("rejects a sweep_var mismatch", () => {
    expect(() => antennaFigure(tauRows(), { kind: "antenna_sweep" })).toThrow(/sweep_var/);
    expect(() => tauFigure(antennaRows([16, 32]), { kind: "tau_sweep" })).toThrow(/sweep_var/);
  });

  it("puts exact -3 dB/doubling data on the guide line", () => {
    const rows = antennaRows([16, 32, 64, 128]);
    const fig = antennaFigure(rows, { kind: "antenna_sweep" });
    const ce = fig.series.find((s) => s.label.startsWith("CE"))!;
    const sx = xScale(fig);
    const sy = yScale(fig);
    const sorted = [...rows].sort((a, b) => a.N - b.N);
    for (const p of ce.points) {
      const onGuide = guideLineY(sorted, p.x);
      expect(sy(p.y)).toBeCloseTo(sy(onGuide), 9);
      expect(sx(p.x)).toBeGreaterThan(0);
    }
  });
});

describe("svg rendering", () => {
  it("is deterministic", () => {
    const fig = buildFigure(antennaRows([16, 32, 64]), { kind: "antenna_sweep" });
    expect(renderSvg(fig)).toBe(renderSvg(fig));
  });

  it("escapes markup in labels", () => {
    const fig = buildFigure(antennaRows([16, 32]), {
      kind: "antenna_sweep",
      title: "a < b & c",
    });
    const svg = renderSvg(fig);
    expect(svg).toContain("a &lt; b &amp; c");
    expect(svg).not.toContain("a < b & c");
  });
});

describe("cli", () => {
  function writeCsv(dir: string, rows: SweepRow[]): string {
    const path = join(dir, "rows.csv");
    const lines = rows.map((r) =>
      [r.sweep_var, r.L, r.tau, r.N, r.M, r.E_star, r.ce_min_db, r.zf_min_db,
       r.gap_db, r.rate_se].join(","),
    );
    writeFileSync(path, ["# seed=1", HEADER, ...lines].join("\n") + "\n");
    return path;
  }

  it("writes nonempty svg and png for a minimal two-row file", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotgen-"));
    const csv = writeCsv(dir, antennaRows([16, 32]));
    const out = join(dir, "fig.png");
    expect(run(["--kind", "n", "--in", csv, "--out", out])).toBe(0);
    const { png, svg } = outputPaths(out);
    expect(statSync(png).size).toBeGreaterThan(0);
    expect(statSync(svg).size).toBeGreaterThan(0);
    expect(readFileSync(svg, "utf8")).toContain("<svg");
    expect(readFileSync(png).subarray(1, 4).toString()).toBe("PNG");
  });

  it("renders the tau kind", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotgen-"));
    const csv = writeCsv(dir, tauRows());
    expect(run(["--kind", "tau", "--in", csv, "--out", join(dir, "fig3")])).toBe(0);
    expect(statSync(join(dir, "fig3.svg")).size).toBeGreaterThan(0);
  });

  it("fails cleanly on empty csv", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotgen-"));
    const path = join(dir, "empty.csv");
    writeFileSync(path, "# nothing\n");
    expect(run(["--kind", "n", "--in", path, "--out", join(dir, "x.png")])).toBe(2);
  });

  it("fails cleanly on a kind mismatch", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotgen-"));
    const csv = writeCsv(dir, tauRows());
    expect(run(["--kind", "n", "--in", csv, "--out", join(dir, "x.png")])).toBe(2);
  });

  it("rejects unknown flags", () => {
    expect(run(["--bogus"])).toBe(2);
  });
});
