#!/usr/bin/env node
/**
 * plot_cactus <csv> <out.svg> [--xmax N] [--ymax MS]
 *
 * Reads a solver bench CSV and writes a cactus plot. PNG output is not
 * supported in this build (no raster backend); ask for .svg.
 */

import { readFileSync, writeFileSync } from "fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { buildSeries, parseBench, renderCactus } from "./cactus.js";

async function main(): Promise<number> {
  const args = await yargs(hideBin(process.argv))
    .usage("$0 <csv> <out> [--xmax N] [--ymax MS]")
    .command("$0 <csv> <out>", "render a cactus plot from a bench CSV")
    .positional("csv", { type: "string", demandOption: true })
    .positional("out", { type: "string", demandOption: true })
    .option("xmax", { type: "number", describe: "instances axis limit" })
    .option("ymax", { type: "number", describe: "time axis limit in ms" })
    .strict()
    .help()
    .parse();

  const csvPath = args.csv as string;
  const outPath = args.out as string;

  if (outPath.endsWith(".png")) {
    console.error("PNG output is not supported in this build; write .svg instead");
    return 2;
  }
  if (!outPath.endsWith(".svg")) {
    console.error(`unsupported output extension on ${outPath}; expected .svg`);
    return 2;
  }

  let text: string;
  try {
    text = readFileSync(csvPath, "utf-8");
  } catch (err) {
    console.error(`cannot read ${csvPath}: ${(err as Error).message}`);
    return 1;
  }

  let series;
  try {
    series = buildSeries(parseBench(text));
  } catch (err) {
    console.error((err as Error).message);
    return 1;
  }

  const svg = renderCactus(series, { xmax: args.xmax, ymax: args.ymax });
  writeFileSync(outPath, svg);
  const points = series.reduce((n, s) => n + s.times.length, 0);
  console.log(`SVG → ${outPath} (${series.length} curves, ${points} points)`);
  return 0;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error("Fatal:", err instanceof Error ? err.message : err);
    process.exit(1);
  }
);
