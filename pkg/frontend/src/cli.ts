#!/usr/bin/env node
/** plotgen --kind {tau|n} --in sweep.csv --out figure.png
 *
 * Writes both a raster (.png) and a vector (.svg) image next to the given
 * output path.  Exits nonzero with a one-line message on malformed input. */

import { writeFileSync } from "node:fs";
import { basename, dirname, extname, join } from "node:path";

import { Resvg } from "@resvg/resvg-js";

import { readSweepCsv, CsvFormatError } from "./csv.js";
import { buildFigure, FigureKind, PlotSpec } from "./plot.js";
import { renderSvg } from "./svg.js";

interface Args {
  kind: FigureKind;
  input: string;
  output: string;
  title?: string;
  seThreshold?: number;
}

export function parseArgs(argv: string[]): Args {
  let kind: string | undefined;
  let input: string | undefined;
  let output: string | undefined;
  let title: string | undefined;
  let seThreshold: number | undefined;
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) throw new UsageError(`missing value for ${a}`);
      return argv[++i];
    };
    switch (a) {
      case "--kind":
        kind = next();
        break;
      case "--in":
        input = next();
        break;
      case "--out":
        output = next();
        break;
      case "--title":
        title = next();
        break;
      case "--se-threshold":
        seThreshold = Number(next());
        break;
      case "--help":
      case "-h":
        throw new UsageError(USAGE, 0);
      default:
        throw new UsageError(`unknown argument: ${a}`);
    }
  }
  if (kind !== "tau" && kind !== "n") {
    throw new UsageError("--kind must be 'tau' or 'n'");
  }
  if (!input || !output) {
    throw new UsageError("--in and --out are required");
  }
  return {
    kind: kind === "tau" ? "tau_sweep" : "antenna_sweep",
    input,
    output,
    title,
    seThreshold,
  };
}

export class UsageError extends Error {
  constructor(message: string, public exitCode = 2) {
    super(message);
  }
}

const USAGE = "usage: plotgen --kind {tau|n} --in sweep.csv --out figure.png " +
  "[--title TEXT] [--se-threshold BPCU]";

export function outputPaths(output: string): { png: string; svg: string } {
  const ext = extname(output);
  const stem = ext ? join(dirname(output), basename(output, ext)) : output;
  return { png: `${stem}.png`, svg: `${stem}.svg` };
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(err.exitCode === 0 ? err.message : `error: ${err.message}`);
      return err.exitCode;
    }
    throw err;
  }
  try {
    const rows = readSweepCsv(args.input);
    const spec: PlotSpec = {
      kind: args.kind,
      title: args.title,
      seThreshold: args.seThreshold,
    };
    const svg = renderSvg(buildFigure(rows, spec));
    const { png, svg: svgPath } = outputPaths(args.output);
    writeFileSync(svgPath, svg);
    const raster = new Resvg(svg, { fitTo: { mode: "zoom", value: 2 } }).render();
    writeFileSync(png, raster.asPng());
    console.log(`wrote ${svgPath} and ${png} (${rows.length} rows)`);
    return 0;
  } catch (err) {
    if (err instanceof CsvFormatError || (err as NodeJS.ErrnoException)?.code === "ENOENT") {
      console.error(`error: ${(err as Error).message}`);
      return 2;
    }
    throw err;
  }
}

const isMain = process.argv[1] !== undefined &&
  import.meta.url.endsWith(basename(process.argv[1]));
if (isMain) {
  process.exit(run(process.argv.slice(2)));
}
