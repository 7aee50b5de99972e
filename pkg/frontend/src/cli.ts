#!/usr/bin/env node
/**
 * plot <figure-kind> --in <csv...> --out <file> [--column C] [--ensemble E]
 *
 * Renders a deterministic SVG from ethlab CSV files; same CSV bytes in,
 * same SVG bytes out.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { parseCsv } from "./csv.js";
import { FigureKind, render } from "./figures.js";

const KINDS: FigureKind[] = [
  "per_eigenstate_scatter",
  "decay_vs_N_semilog",
  "energy_scan",
  "histogram",
  "mi_vs_distance",
];

export interface CliArgs {
  kind: FigureKind;
  inputs: string[];
  out: string;
  column?: string;
  ensemble?: string;
}

export function parseArgs(argv: string[]): CliArgs {
  if (argv.length === 0) throw new Error(`usage: plot <${KINDS.join("|")}> --in <csv...> --out <file>`);
  const [kind, ...rest] = argv;
  if (!KINDS.includes(kind as FigureKind)) {
    throw new Error(`unknown figure kind "${kind}"; choices: ${KINDS.join(", ")}`);
  }
  const inputs: string[] = [];
  let out: string | undefined;
  let column: string | undefined;
  let ensemble: string | undefined;
  for (let k = 0; k < rest.length; k++) {
    const arg = rest[k];
    const next = () => {
      if (k + 1 >= rest.length) throw new Error(`flag ${arg} needs a value`);
      return rest[++k];
    };
    if (arg === "--in") {
      inputs.push(next());
      while (k + 1 < rest.length && !rest[k + 1].startsWith("--")) inputs.push(rest[++k]);
    } else if (arg === "--out") {
      out = next();
    } else if (arg === "--column") {
      column = next();
    } else if (arg === "--ensemble") {
      ensemble = next();
    } else {
      throw new Error(`unknown flag ${arg}`);
    }
  }
  if (inputs.length === 0) throw new Error("at least one --in CSV is required");
  if (!out) throw new Error("--out <file> is required");
  return { kind: kind as FigureKind, inputs, out, column, ensemble };
}

export function main(argv: string[]): number {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`plot: ${(err as Error).message}`);
    return 1;
  }
  try {
    const tables = args.inputs.map((path) => parseCsv(readFileSync(path, "utf8"), path));
    const svg = render(args.kind, tables, { column: args.column, ensemble: args.ensemble });
    writeFileSync(args.out, svg);
    console.log(args.out);
    return 0;
  } catch (err) {
    console.error(`plot: ${(err as Error).message}`);
    return 1;
  }
}

const isEntry = process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop() as string);
if (isEntry) {
  process.exit(main(process.argv.slice(2)));
}
