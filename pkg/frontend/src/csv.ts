/**
 * CSV access with strict header validation.
 *
 * The harness writes plain comma-separated files (no quoting, no embedded
 * commas); a figure refuses any file whose header does not match its schema
 * exactly, so schema drift fails loudly instead of mis-drawing.
 */

import { readFileSync } from "fs";

export interface Table {
  file: string;
  header: string[];
  rows: string[][];
}

export const SCHEMAS = {
  gaps: [
    "model", "N", "instance", "h", "t_mode", "t", "beta",
    "delta", "lambda2", "reducible", "db_residual",
  ],
  gapFits: ["model", "t_mode", "h", "t", "k", "prefactor_log2", "residual", "n_points"],
  gapMeans: ["model", "t_mode", "h", "t", "N", "mean_delta", "stderr_delta", "n_instances"],
  baselineFits: ["model", "strategy", "beta", "k", "prefactor_log2", "residual"],
  iprWindows: ["model", "N", "instance", "h", "window_lo", "window_hi", "mean_ipr"],
  iprVectors: ["model", "N", "h", "index", "energy", "ipr"],
  iprExponents: ["model", "h", "k", "prefactor_log2", "residual", "n_points"],
  timeTrace: ["model", "N", "h", "h_role", "t", "mean_delta", "stderr_delta", "long_time_mean"],
  isingBound: ["N", "h", "t_mode", "t", "beta", "first_term_log", "second_term", "total"],
} as const;

export class FigureInputError extends Error {}

export function readCsv(file: string, schema: readonly string[]): Table {
  let text: string;
  try {
    text = readFileSync(file, "utf-8");
  } catch {
    throw new FigureInputError(`missing input CSV: ${file}`);
  }
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new FigureInputError(`empty CSV: ${file}`);
  }
  const header = lines[0].split(",");
  if (header.length !== schema.length || schema.some((c, i) => header[i] !== c)) {
    throw new FigureInputError(
      `schema mismatch in ${file}: expected [${schema.join(",")}], got [${header.join(",")}]`,
    );
  }
  const rows = lines.slice(1).map((line) => line.split(","));
  if (rows.length === 0) {
    throw new FigureInputError(`CSV has a header but no rows: ${file}`);
  }
  return { file, header, rows };
}

export function col(table: Table, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) throw new FigureInputError(`column ${name} missing in ${table.file}`);
  return table.rows.map((row) => row[idx]);
}

export function numCol(table: Table, name: string): number[] {
  return col(table, name).map((value) => {
    const x = Number(value);
    if (!Number.isFinite(x) && value !== "-inf" && value !== "inf") {
      if (value === "") return NaN;
      if (value === "-Infinity" || value === "Infinity") return Number(value);
    }
    return x;
  });
}

/** Unique values of a column in first-appearance order. */
export function uniq(values: string[]): string[] {
  const seen = new Set<string>();
  const out: string[] = [];
  for (const value of values) {
    if (!seen.has(value)) {
      seen.add(value);
      out.push(value);
    }
  }
  return out;
}
