#!/usr/bin/env node
/**
 * plots <figure-kind> --in DIR --out FILE
 *
 * Renders one figure from a completed experiment directory.  The output is
 * written atomically: a failed render leaves no partial file behind.
 */

import { mkdirSync, renameSync, rmSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import { FIGURE_KINDS, FigureKind, FigureSpec, render } from "./figures.js";

export function parseArgs(argv: string[]): FigureSpec {
  const [kind, ...rest] = argv;
  if (!kind || !FIGURE_KINDS.includes(kind as FigureKind)) {
    throw new Error(
      `usage: plots <${FIGURE_KINDS.join("|")}> --in DIR --out FILE`,
    );
  }
  let inputDir: string | undefined;
  let outputPath: string | undefined;
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (value === undefined) {
      throw new Error(`missing value for ${flag}`);
    }
    if (flag === "--in") inputDir = value;
    else if (flag === "--out") outputPath = value;
    else throw new Error(`unknown flag ${flag}`);
  }
  if (!inputDir || !outputPath) {
    throw new Error("both --in DIR and --out FILE are required");
  }
  return { kind: kind as FigureKind, inputDir, outputPath };
}

export function writeFigure(spec: FigureSpec): void {
  const svg = render(spec);  // any failure happens before the file exists
  mkdirSync(dirname(spec.outputPath) || ".", { recursive: true });
  const tmp = spec.outputPath + ".tmp";
  try {
    writeFileSync(tmp, svg);
    renameSync(tmp, spec.outputPath);
  } catch (err) {
    rmSync(tmp, { force: true });
    throw err;
  }
}

export function main(argv: string[]): number {
  try {
    const spec = parseArgs(argv);
    writeFigure(spec);
    console.log(`wrote ${spec.outputPath}`);
    return 0;
  } catch (err) {
    console.error(`plots: ${(err as Error).message}`);
    return 1;
  }
}

if (process.argv[1] && import.meta.url.endsWith(process.argv[1].split("/").pop()!)) {
  process.exit(main(process.argv.slice(2)));
}
