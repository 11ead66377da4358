import { existsSync, mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, describe, expect, it } from "vitest";

import { column, readCsv, readPgm } from "../src/data.js";
import { FIGURE_KINDS, render } from "../src/figures.js";
import { main, parseArgs, writeFigure } from "../src/cli.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");
const DECONV = join(FIXTURES, "deconv");
const TOMO = join(FIXTURES, "tomo");
const REGSWEEP = join(FIXTURES, "regsweep");

const scratch: string[] = [];
function tmp(): string {
  const dir = mkdtempSync(join(tmpdir(), "plots-"));
  scratch.push(dir);
  return dir;
}
afterAll(() => scratch.forEach((dir) => rmSync(dir, { recursive: true, force: true })));

function attr(svg: string, element: string, name: string): string[] {
  const out: string[] = [];
  const re = new RegExp(`<${element} [^>]*${name}="([^"]*)"`, "g");
  for (const match of svg.matchAll(re)) {
    out.push(match[1]);
  }
  return out;
}

describe("figure rendering", () => {
  it("renders every figure kind from completed runs without error", () => {
    const dirs: Record<string, string> = {
      "trajectories": DECONV,
      "histograms": TOMO,
      "deconv-overlay": DECONV,
      "image-grid": TOMO,
      "beta-sweep": REGSWEEP,
    };
    for (const kind of FIGURE_KINDS) {
      const svg = render({ kind, inputDir: dirs[kind], outputPath: "" });
      expect(svg.startsWith("<svg ")).toBe(true);
      expect(svg.endsWith("</svg>")).toBe(true);
    }
  });

  it("trajectories figure has two panels and round-trips the CSV exactly", () => {
    const svg = render({ kind: "trajectories", inputDir: DECONV, outputPath: "" });
    expect(svg.match(/class="panel"/g)?.length).toBe(2);
    const labels = attr(svg, "polyline", "data-label");
    expect(labels).toContain("dc");
    expect(labels).toContain("mse");
    const table = readCsv(join(DECONV, "trajectory_dc.csv"));
    const xs = attr(svg, "polyline", "data-x");
    const ys = attr(svg, "polyline", "data-y");
    const idx = labels.indexOf("dc");
    // second panel repeats the series; first occurrence is the fit panel
    expect(xs[idx].split(" ")).toEqual(column(table, "iteration").raw);
    expect(ys[idx].split(" ")).toEqual(column(table, "mse_or_nll").raw);
    const dcIdx = labels.lastIndexOf("dc");
    expect(ys[dcIdx].split(" ")).toEqual(column(table, "dc").raw);
  });

  it("histogram bars round-trip bin edges and counts", () => {
    const svg = render({ kind: "histograms", inputDir: TOMO, outputPath: "" });
    const table = readCsv(join(TOMO, "hist_dc.csv"));
    const los = attr(svg, "g", "data-lo");
    const counts = attr(svg, "g", "data-count");
    expect(los[0].split(" ")).toEqual(column(table, "bin_lo").raw);
    expect(counts[0].split(" ")).toEqual(column(table, "count").raw);
  });

  it("deconv overlay round-trips the signal table", () => {
    const svg = render({ kind: "deconv-overlay", inputDir: DECONV, outputPath: "" });
    const table = readCsv(join(DECONV, "signals.csv"));
    const labels = attr(svg, "polyline", "data-label");
    const ys = attr(svg, "polyline", "data-y");
    for (const name of ["theta_true", "recon_dc", "measured", "reblurred_mse"]) {
      const i = labels.indexOf(name);
      expect(i).toBeGreaterThanOrEqual(0);
      expect(ys[i].split(" ")).toEqual(column(table, name).raw);
    }
  });

  it("image grid reproduces every pixel of a snapshot", () => {
    const svg = render({ kind: "image-grid", inputDir: TOMO, outputPath: "" });
    const img = readPgm(join(TOMO, "image_truth.pgm"));
    const start = svg.indexOf('data-width="16"');
    expect(start).toBeGreaterThan(0);
    const pixelValues = attr(svg, "rect", "data-v").slice(0, img.pixels.length);
    expect(pixelValues.map(Number)).toEqual(img.pixels);
  });

  it("beta sweep round-trips the grid including beta = 0", () => {
    const svg = render({ kind: "beta-sweep", inputDir: REGSWEEP, outputPath: "" });
    const table = readCsv(join(REGSWEEP, "sweep_dc.csv"));
    const labels = attr(svg, "polyline", "data-label");
    const i = labels.indexOf("dc");
    expect(attr(svg, "polyline", "data-x")[i].split(" "))
      .toEqual(column(table, "beta").raw);
    expect(attr(svg, "polyline", "data-y")[i].split(" "))
      .toEqual(column(table, "nrmse").raw);
  });
});

describe("failure handling", () => {
  it("empty directory fails without writing a partial file", () => {
    const dir = tmp();
    const out = join(dir, "fig.svg");
    expect(() => writeFigure({ kind: "trajectories", inputDir: dir, outputPath: out }))
      .toThrow(/no trajectory/);
    expect(existsSync(out)).toBe(false);
    expect(existsSync(out + ".tmp")).toBe(false);
  });

  it("malformed CSV gives a descriptive error", () => {
    const dir = tmp();
    const bad = join(dir, "trajectory_x.csv");
    writeFileSync(bad, "iteration,dc\n1,notanumber\n");
    expect(() => render({ kind: "trajectories", inputDir: dir, outputPath: "" }))
      .toThrow(/non-numeric cell/);
  });

  it("missing required column is reported by name", () => {
    const dir = tmp();
    writeFileSync(join(dir, "trajectory_x.csv"), "a,b\n1,2\n");
    expect(() => render({ kind: "trajectories", inputDir: dir, outputPath: "" }))
      .toThrow(/missing column 'iteration'/);
  });
});

describe("cli", () => {
  it("parses arguments", () => {
    const spec = parseArgs(["histograms", "--in", "/a", "--out", "/b.svg"]);
    expect(spec).toEqual({ kind: "histograms", inputDir: "/a", outputPath: "/b.svg" });
    expect(() => parseArgs(["nope", "--in", "/a", "--out", "/b"])).toThrow(/usage/);
    expect(() => parseArgs(["histograms", "--in", "/a"])).toThrow(/required/);
  });

  it("writes a figure end to end and reports success", () => {
    const out = join(tmp(), "traj.svg");
    const code = main(["trajectories", "--in", DECONV, "--out", out]);
    expect(code).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("</svg>");
  });

  it("returns nonzero on failure", () => {
    const code = main(["trajectories", "--in", tmp(), "--out", join(tmp(), "x.svg")]);
    expect(code).toBe(1);
  });
});
