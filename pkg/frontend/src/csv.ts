import { readFileSync } from "node:fs";

export const CSV_HEADER = [
  "sweep_var", "L", "tau", "N", "M", "E_star",
  "ce_min_db", "zf_min_db", "gap_db", "rate_se",
] as const;

export interface SweepRow {
  sweep_var: string;
  L: number;
  tau: number;
  N: number;
  M: number;
  E_star: number;
  ce_min_db: number;
  zf_min_db: number;
  gap_db: number;
  rate_se: number;
}

export class CsvFormatError extends Error {}

/** Parse a ceprecode sweep CSV; `#` lines are comments, header is strict. */
export function parseSweepCsv(text: string): SweepRow[] {
  const lines = text
    .split(/\r?\n/)
    .filter((ln) => ln.length > 0 && !ln.startsWith("#"));
  if (lines.length === 0) {
    throw new CsvFormatError("empty CSV: no header row");
  }
  const header = lines[0].split(",");
  if (header.length !== CSV_HEADER.length || header.some((h, i) => h !== CSV_HEADER[i])) {
    throw new CsvFormatError(
      `unexpected header: got "${lines[0]}", want "${CSV_HEADER.join(",")}"`,
    );
  }
  if (lines.length === 1) {
    throw new CsvFormatError("empty CSV: header but no data rows");
  }
  return lines.slice(1).map((line, idx) => {
    const parts = line.split(",");
    if (parts.length !== CSV_HEADER.length) {
      throw new CsvFormatError(`row ${idx + 1}: expected ${CSV_HEADER.length} columns`);
    }
    const num = (j: number): number => {
      const v = Number(parts[j]);
      if (!Number.isFinite(v)) {
        throw new CsvFormatError(`row ${idx + 1}: column ${CSV_HEADER[j]} is not finite`);
      }
      return v;
    };
    return {
      sweep_var: parts[0],
      L: num(1),
      tau: num(2),
      N: num(3),
      M: num(4),
      E_star: num(5),
      ce_min_db: num(6),
      zf_min_db: num(7),
      gap_db: num(8),
      rate_se: num(9),
    };
  });
}

export function readSweepCsv(path: string): SweepRow[] {
  return parseSweepCsv(readFileSync(path, "utf8"));
}
