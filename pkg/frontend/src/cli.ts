/**
 * figures CLI: render experiment CSVs into SVG or PNG images.
 *
 *   qmcmc-figures <experiment-dir> [--only <figure-id>] [--format png|svg] [--out <dir>]
 *
 * Reads only the harness CSVs (and config.resolved.json, when present, for
 * labeling); exits 1 when a requested figure's inputs are missing or fail
 * schema validation.
 */

import { existsSync, mkdirSync, writeFileSync } from "fs";
import { join } from "path";

import { FigureInputError } from "./csv.js";
import { FIGURES, FigureId, availableFigures, renderFigure } from "./figures.js";

interface Args {
  dir: string;
  only: FigureId | null;
  format: "svg" | "png";
  out: string;
}

export function parseArgs(argv: string[]): Args {
  let dir: string | null = null;
  let only: FigureId | null = null;
  let format: "svg" | "png" = "svg";
  let out: string | null = null;
  for (let i = 0; i < argv.length; i += 1) {
    const arg = argv[i];
    if (arg === "--only") {
      const value = argv[++i];
      if (!(value in FIGURES)) {
        throw new FigureInputError(
          `unknown figure id ${value}; known: ${Object.keys(FIGURES).join(", ")}`,
        );
      }
      only = value as FigureId;
    } else if (arg === "--format") {
      const value = argv[++i];
      if (value !== "svg" && value !== "png") {
        throw new FigureInputError("--format must be svg or png");
      }
      format = value;
    } else if (arg === "--out") {
      out = argv[++i];
    } else if (arg.startsWith("--")) {
      throw new FigureInputError(`unknown option ${arg}`);
    } else if (dir === null) {
      dir = arg;
    } else {
      throw new FigureInputError(`unexpected argument ${arg}`);
    }
  }
  if (dir === null) {
    throw new FigureInputError(
      "usage: qmcmc-figures <experiment-dir> [--only <id>] [--format png|svg] [--out <dir>]",
    );
  }
  return { dir, only, format, out: out ?? join(dir, "figures") };
}

async function toPng(svg: string): Promise<Buffer> {
  const { Resvg } = await import("@resvg/resvg-js");
  const renderer = new Resvg(svg, { font: { loadSystemFonts: true } });
  return renderer.render().asPng();
}

export async function run(argv: string[]): Promise<number> {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (error) {
    console.error(String(error instanceof Error ? error.message : error));
    return 1;
  }
  if (!existsSync(args.dir)) {
    console.error(`experiment directory not found: ${args.dir}`);
    return 1;
  }
  const targets = args.only ? [args.only] : availableFigures(args.dir);
  if (targets.length === 0) {
    console.error(`no renderable figures in ${args.dir} (no matching CSV inputs)`);
    return 1;
  }
  mkdirSync(args.out, { recursive: true });
  let written = 0;
  for (const id of targets) {
    try {
      const svg = renderFigure(id, args.dir);
      const path = join(args.out, `${id}.${args.format}`);
      if (args.format === "svg") {
        writeFileSync(path, svg);
      } else {
        writeFileSync(path, await toPng(svg));
      }
      written += 1;
      console.log(`wrote ${path}`);
    } catch (error) {
      const message = `${id}: ${error instanceof Error ? error.message : error}`;
      if (args.only || !(error instanceof FigureInputError)) {
        // explicit requests and real failures are fatal; in discovery mode a
        // content mismatch (e.g. no finite-time rows) just skips the figure
        console.error(message);
        return 1;
      }
      console.error(`skipped ${message}`);
    }
  }
  if (written === 0) {
    console.error("no figure could be rendered from the available CSVs");
    return 1;
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === `file://${process.argv[1]}`;
if (invokedDirectly) {
  run(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
