/**
 * Readers for the experiment artifacts: strict CSV (header + numeric rows),
 * ASCII PGM (P2) images and the summary JSON.
 *
 * Every cell keeps its raw source token next to the parsed number, so the
 * renderer can embed exactly what the file said: plotted values round-trip
 * the source bytes, never a re-serialization.
 */

import { readFileSync, readdirSync } from "node:fs";
import { join } from "node:path";

export interface Column {
  name: string;
  raw: string[];
  values: number[];
}

export interface Table {
  path: string;
  columns: Map<string, Column>;
  rows: number;
}

function parseNumeric(cell: string): number | undefined {
  // Python float repr spellings for the special values
  if (cell === "nan" || cell === "NaN") return NaN;
  if (cell === "inf") return Infinity;
  if (cell === "-inf") return -Infinity;
  const value = Number(cell);
  return Number.isNaN(value) ? undefined : value;
}

export function readCsv(path: string): Table {
  const text = readFileSync(path, "utf8");
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length < 1) {
    throw new Error(`${path}: empty CSV`);
  }
  const names = lines[0].split(",");
  const columns = new Map<string, Column>(
    names.map((name) => [name, { name, raw: [], values: [] }]),
  );
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== names.length) {
      throw new Error(`${path}:${i + 1}: expected ${names.length} cells, got ${cells.length}`);
    }
    cells.forEach((cell, j) => {
      const value = parseNumeric(cell);
      if (value === undefined) {
        throw new Error(`${path}:${i + 1}: non-numeric cell '${cell}'`);
      }
      const col = columns.get(names[j])!;
      col.raw.push(cell);
      col.values.push(value);
    });
  }
  return { path, columns, rows: lines.length - 1 };
}

export function column(table: Table, name: string): Column {
  const col = table.columns.get(name);
  if (!col) {
    throw new Error(`${table.path}: missing column '${name}'`);
  }
  return col;
}

export interface PgmImage {
  width: number;
  height: number;
  maxval: number;
  pixels: number[]; // row-major
}

export function readPgm(path: string): PgmImage {
  const text = readFileSync(path, "utf8");
  const tokens = text
    .split("\n")
    .map((line) => line.split("#")[0])
    .join(" ")
    .trim()
    .split(/\s+/);
  if (tokens[0] !== "P2") {
    throw new Error(`${path}: not an ASCII PGM (P2) file`);
  }
  const [width, height, maxval] = tokens.slice(1, 4).map(Number);
  const pixels = tokens.slice(4).map(Number);
  if (pixels.length !== width * height) {
    throw new Error(`${path}: pixel count ${pixels.length} != ${width * height}`);
  }
  return { width, height, maxval, pixels };
}

export function readSummary(dir: string): Record<string, unknown> {
  return JSON.parse(readFileSync(join(dir, "summary.json"), "utf8"));
}

export function listFiles(dir: string, pattern: RegExp): string[] {
  let names: string[];
  try {
    names = readdirSync(dir);
  } catch (err) {
    throw new Error(`cannot read input directory ${dir}: ${(err as Error).message}`);
  }
  return names.filter((name) => pattern.test(name)).sort();
}
