#!/usr/bin/env node
/**
 * faa-plots render --csv <path> --kind <convergence|sweep> --x <col> --out <path> [--dpi <n>]
 *
 * Exit codes: 0 rendered, 1 bad arguments or defective input CSV.
 */

import { parseArgs } from "node:util";
import { CsvError } from "./csv.js";
import { FigureKind, renderFigure } from "./render.js";

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (command !== "render") {
    process.stderr.write(
      `usage: faa-plots render --csv <path> --kind <convergence|sweep> ` +
        `--x <col> --out <path> [--dpi <n>]\n`,
    );
    return 1;
  }
  let parsed;
  try {
    parsed = parseArgs({
      args: rest,
      options: {
        csv: { type: "string" },
        kind: { type: "string" },
        x: { type: "string" },
        out: { type: "string" },
        dpi: { type: "string" },
      },
    });
  } catch (err) {
    process.stderr.write(`argument error: ${(err as Error).message}\n`);
    return 1;
  }
  const { csv, kind, x, out, dpi } = parsed.values;
  if (!csv || !kind || !x || !out) {
    process.stderr.write("missing required flag(s): --csv --kind --x --out\n");
    return 1;
  }
  if (kind !== "convergence" && kind !== "sweep") {
    process.stderr.write(`unknown kind ${JSON.stringify(kind)}; expected convergence or sweep\n`);
    return 1;
  }
  const dpiValue = dpi === undefined ? undefined : Number(dpi);
  if (dpiValue !== undefined && (!Number.isFinite(dpiValue) || dpiValue <= 0)) {
    process.stderr.write(`invalid --dpi ${JSON.stringify(dpi)}\n`);
    return 1;
  }
  try {
    renderFigure({
      csvPath: csv,
      kind: kind as FigureKind,
      xColumn: x,
      outPath: out,
      dpi: dpiValue,
    });
  } catch (err) {
    if (err instanceof CsvError) {
      process.stderr.write(`${err.message}\n`);
      return 1;
    }
    throw err;
  }
  process.stdout.write(`wrote ${out}\n`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
