#!/usr/bin/env node
/**
 * plots <kind> --run <dir> [--field m|u] [--times 0,0.5,...] -o <file>
 *
 * Renders one SVG figure from a solver run directory. Exit code 0 on
 * success, 2 on any input or validation problem.
 */

import * as fs from "fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { KINDS, renderFigure } from "./figures";
import { ParseError } from "./schema";
import { loadRun } from "./run";

function parseTimes(raw: string): number[] {
  const parts = raw.split(",").map((s) => s.trim()).filter((s) => s !== "");
  if (parts.length === 0) throw new ParseError("--times is empty");
  return parts.map((s) => {
    const v = Number(s);
    if (Number.isNaN(v)) throw new ParseError(`--times entry '${s}' is not a number`);
    return v;
  });
}

export function main(argv: string[]): number {
  const parser = yargs(argv)
    .scriptName("plots")
    .command(
      "$0 <kind>",
      "render one figure from a run directory",
      (y) =>
        y
          .positional("kind", {
            describe: "figure kind",
            choices: KINDS as unknown as string[],
            type: "string",
          })
          .option("run", {
            describe: "run directory with fields_u.csv, fields_m.csv, history.json, meta.json",
            type: "string",
            demandOption: true,
          })
          .option("out", {
            alias: "o",
            describe: "output SVG path",
            type: "string",
            demandOption: true,
          })
          .option("field", {
            describe: "which field to draw",
            choices: ["m", "u"] as const,
            default: "m" as const,
          })
          .option("times", {
            describe: "comma-separated instants for slices and snapshots",
            type: "string",
          }),
      () => undefined,
    )
    .strict()
    .help()
    .fail((msg, err) => {
      throw err ?? new ParseError(msg);
    });

  try {
    const args = parser.parseSync() as unknown as {
      kind: string;
      run: string;
      out: string;
      field: "m" | "u";
      times?: string;
    };
    const times = args.times === undefined ? undefined : parseTimes(args.times);
    const run = loadRun(args.run);
    const svg = renderFigure(args.kind, run, { field: args.field, times });
    fs.writeFileSync(args.out, svg);
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 2;
  }
}

if (require.main === module) {
  process.exitCode = main(hideBin(process.argv));
}
