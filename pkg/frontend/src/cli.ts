#!/usr/bin/env node
/**
 * plotkit — SVG renderers for ellopt CSV dumps.
 *
 * Usage:
 *   plotkit surface-pair --in left.csv,right.csv --out fig.svg [--title t]
 *   plotkit colormap     --in field.csv          --out fig.svg
 *   plotkit convergence  --in report.csv         --out fig.svg
 *   plotkit sweep-grid   --in a.csv,b.csv,...    --out fig.svg
 *
 * Exit codes: 0 success, 1 malformed input/usage (no output written).
 */

import { readFileSync, writeFileSync } from "node:fs";

import { CsvError, parseFieldCsv, parseReportCsv } from "./csv.js";
import { renderColorMap } from "./colormap.js";
import { renderConvergence } from "./convergence.js";
import { renderSurfacePair } from "./surface.js";
import { renderSweepGrid, sweepLabel } from "./sweepgrid.js";

const KINDS = ["surface-pair", "colormap", "convergence", "sweep-grid"] as const;
type Kind = (typeof KINDS)[number];

export interface CliOptions {
  kind: Kind;
  inputs: string[];
  out: string;
  title?: string;
}

export function parseArgs(argv: string[]): CliOptions {
  if (argv.length === 0 || argv[0] === "--help" || argv[0] === "-h") {
    throw new CsvError(
      `usage: plotkit <${KINDS.join("|")}> --in <csv>[,<csv>...] --out <svg> [--title <t>]`
    );
  }
  const kind = argv[0] as Kind;
  if (!KINDS.includes(kind)) {
    throw new CsvError(`unknown plot kind "${argv[0]}"; expected one of ${KINDS.join(", ")}`);
  }
  const inputs: string[] = [];
  let out = "";
  let title: string | undefined;
  for (let k = 1; k < argv.length; k++) {
    const arg = argv[k];
    const next = () => {
      if (k + 1 >= argv.length) throw new CsvError(`missing value after ${arg}`);
      return argv[++k];
    };
    if (arg === "--in") inputs.push(...next().split(",").filter((s) => s.length > 0));
    else if (arg === "--out") out = next();
    else if (arg === "--title") title = next();
    else throw new CsvError(`unknown argument "${arg}"`);
  }
  if (inputs.length === 0) throw new CsvError("--in is required");
  if (!out) throw new CsvError("--out is required");
  return { kind, inputs, out, title };
}

function basename(path: string): string {
  return (path.split(/[\\/]/).pop() ?? path).replace(/\.csv$/i, "");
}

export function render(opts: CliOptions): string {
  const read = (path: string) => {
    try {
      return readFileSync(path, "utf-8");
    } catch {
      throw new CsvError(`cannot read ${path}`);
    }
  };
  switch (opts.kind) {
    case "surface-pair": {
      if (opts.inputs.length !== 2) {
        throw new CsvError("surface-pair needs exactly two field CSVs (--in left.csv,right.csv)");
      }
      const left = parseFieldCsv(read(opts.inputs[0]));
      const right = parseFieldCsv(read(opts.inputs[1]));
      return renderSurfacePair(left, right, [basename(opts.inputs[0]), basename(opts.inputs[1])], {
        title: opts.title,
      });
    }
    case "colormap": {
      if (opts.inputs.length !== 1) throw new CsvError("colormap takes one field CSV");
      return renderColorMap(parseFieldCsv(read(opts.inputs[0])), { title: opts.title });
    }
    case "convergence": {
      if (opts.inputs.length !== 1) throw new CsvError("convergence takes one report CSV");
      return renderConvergence(parseReportCsv(read(opts.inputs[0])), { title: opts.title });
    }
    case "sweep-grid": {
      const entries = opts.inputs.map((path) => ({
        label: sweepLabel(path),
        field: parseFieldCsv(read(path)),
      }));
      return renderSweepGrid(entries, { title: opts.title });
    }
  }
}

export function main(argv: string[]): number {
  try {
    const opts = parseArgs(argv);
    const svg = render(opts);  // render fully before touching the output path
    writeFileSync(opts.out, svg);
    console.log(`wrote ${opts.out}`);
    return 0;
  } catch (err) {
    if (err instanceof CsvError) {
      console.error(`plotkit: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("plotkit")) {
  process.exit(main(process.argv.slice(2)));
}
