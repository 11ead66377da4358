/**
 * The five figure kinds regenerated from experiment artifacts.
 *
 * Each renderer reads the harness outputs from an input directory, builds
 * panels and returns the finished SVG text.  Rendering never reinterprets
 * values: source tokens are carried verbatim into data attributes.
 */

import { basename, join } from "node:path";

import { Table, column, listFiles, readCsv, readPgm } from "./data.js";
import {
  COLORS,
  PanelOptions,
  Series,
  barPanel,
  document,
  imagePanel,
  linePanel,
} from "./svg.js";

export type FigureKind =
  | "trajectories"
  | "histograms"
  | "deconv-overlay"
  | "image-grid"
  | "beta-sweep";

export interface FigureSpec {
  kind: FigureKind;
  inputDir: string;
  outputPath: string;
}

const PANEL_W = 420;
const PANEL_H = 300;

function trajectoryTables(dir: string): Map<string, Table> {
  const files = listFiles(dir, /^trajectory_.*\.csv$/);
  if (files.length === 0) {
    throw new Error(`no trajectory_*.csv files in ${dir}`);
  }
  return new Map(files.map((f) => [
    basename(f, ".csv").replace("trajectory_", ""),
    readCsv(join(dir, f)),
  ]));
}

function trajectorySeries(tables: Map<string, Table>, field: string,
                          markers = false): Series[] {
  return [...tables.entries()].map(([method, table], i) => ({
    label: method,
    x: column(table, "iteration").values,
    y: column(table, field).values,
    rawX: column(table, "iteration").raw,
    rawY: column(table, field).raw,
    color: COLORS[i % COLORS.length],
    markers,
  }));
}

/** Loss curves: fit metric and distributional-consistency metric, one curve
 * per trained method. */
export function renderTrajectories(dir: string): string {
  const tables = trajectoryTables(dir);
  const base: Omit<PanelOptions, "title" | "yLabel"> = {
    xLabel: "iteration",
    logX: true,
    logY: true,
    width: PANEL_W,
    height: PANEL_H,
  };
  const fit = linePanel(trajectorySeries(tables, "mse_or_nll"), {
    ...base,
    title: "fit metric over iterations",
    yLabel: "mse / nll",
  });
  const dcSeries = trajectorySeries(tables, "dc");
  const dc = linePanel(dcSeries, {
    ...base,
    title: "distributional consistency over iterations",
    yLabel: "dc loss",
    logY: false,
  });
  const body = [
    `<g>${fit}</g>`,
    `<g transform="translate(${PANEL_W},0)">${dc}</g>`,
  ];
  return document(body, 2 * PANEL_W, PANEL_H);
}

/** One bar chart per hist_*.csv in the directory. */
export function renderHistograms(dir: string): string {
  const files = listFiles(dir, /^hist_.*\.csv$/);
  if (files.length === 0) {
    throw new Error(`no hist_*.csv files in ${dir}`);
  }
  const perRow = Math.min(files.length, 3);
  const body = files.map((file, i) => {
    const table = readCsv(join(dir, file));
    const lo = column(table, "bin_lo");
    const hi = column(table, "bin_hi");
    const count = column(table, "count");
    const panel = barPanel(lo.values, hi.values, count.values,
                           { lo: lo.raw, hi: hi.raw, count: count.raw },
                           {
                             title: basename(file, ".csv").replace("hist_", "scores: "),
                             width: PANEL_W,
                             height: PANEL_H,
                           });
    const tx = (i % perRow) * PANEL_W;
    const ty = Math.floor(i / perRow) * PANEL_H;
    return `<g transform="translate(${tx},${ty})">${panel}</g>`;
  });
  const rows = Math.ceil(files.length / perRow);
  return document(body, perRow * PANEL_W, rows * PANEL_H);
}

/** Reconstructed signal against the truth, and the re-blurred signals
 * against the measurements. */
export function renderDeconvOverlay(dir: string): string {
  const table = readCsv(join(dir, "signals.csv"));
  const x = column(table, "x");
  const mk = (name: string, color: string, markers = false): Series => {
    const col = column(table, name);
    return { label: name, x: x.values, y: col.values,
             rawX: x.raw, rawY: col.raw, color, markers };
  };
  const top: Series[] = [mk("theta_true", "#333")];
  const bottom: Series[] = [mk("blurred_true", "#333"), mk("measured", "#999")];
  let i = 0;
  for (const name of table.columns.keys()) {
    if (name.startsWith("recon_")) {
      top.push(mk(name, COLORS[i % COLORS.length]));
      bottom.push(mk(`reblurred_${name.slice(6)}`, COLORS[i % COLORS.length]));
      i += 1;
    }
  }
  const base: Omit<PanelOptions, "title" | "yLabel"> = {
    xLabel: "x",
    width: 2 * PANEL_W,
    height: PANEL_H,
  };
  const body = [
    `<g>${linePanel(top, { ...base, title: "estimated signal vs truth", yLabel: "signal" })}</g>`,
    `<g transform="translate(0,${PANEL_H})">${linePanel(bottom, {
      ...base,
      title: "re-blurred estimates vs measurements",
      yLabel: "blurred signal",
    })}</g>`,
  ];
  return document(body, 2 * PANEL_W, 2 * PANEL_H);
}

/** Snapshot images per method and iteration, plus the ground truth. */
export function renderImageGrid(dir: string): string {
  const files = listFiles(dir, /^image_.*\.pgm$/);
  if (files.length === 0) {
    throw new Error(`no image_*.pgm files in ${dir}`);
  }
  const byMethod = new Map<string, { iter: number; file: string }[]>();
  const singles: string[] = [];
  for (const file of files) {
    const match = /^image_(.+)_(\d+)\.pgm$/.exec(file);
    if (match) {
      const list = byMethod.get(match[1]) ?? [];
      list.push({ iter: Number(match[2]), file });
      byMethod.set(match[1], list);
    } else {
      singles.push(file);
    }
  }
  const methods = [...byMethod.keys()].sort();
  const iterations = [...new Set(
    methods.flatMap((m) => byMethod.get(m)!.map((e) => e.iter)),
  )].sort((a, b) => a - b);

  const probe = readPgm(join(dir, files[0]));
  const cell = Math.max(2, Math.floor(192 / probe.width));
  const tile = probe.width * cell + 18;
  const body: string[] = [];
  singles.forEach((file, i) => {
    const img = readPgm(join(dir, file));
    const panel = imagePanel(img.pixels, img.width, img.height, img.maxval,
                             basename(file, ".pgm"), cell);
    body.push(`<g transform="translate(${i * tile + 10},24)">${panel}</g>`);
  });
  methods.forEach((method, r) => {
    const row = new Map(byMethod.get(method)!.map((e) => [e.iter, e.file]));
    iterations.forEach((iter, c) => {
      const file = row.get(iter);
      if (!file) return;
      const img = readPgm(join(dir, file));
      const panel = imagePanel(img.pixels, img.width, img.height, img.maxval,
                               `${method} @ ${iter}`, cell);
      const ty = (r + 1) * (probe.height * cell + 30) + 24;
      body.push(`<g transform="translate(${c * tile + 10},${ty})">${panel}</g>`);
    });
  });
  const width = Math.max(iterations.length, singles.length, 1) * tile + 20;
  const height = (methods.length + 1) * (probe.height * cell + 30) + 34;
  return document(body, width, height);
}

/** Reconstruction error against regularization strength for each method.
 * The beta = 0 grid point is drawn one decade left of the smallest positive
 * beta (annotated as zero); its source token is preserved like any other. */
export function renderBetaSweep(dir: string): string {
  const files = listFiles(dir, /^sweep_.*\.csv$/);
  if (files.length === 0) {
    throw new Error(`no sweep_*.csv files in ${dir}`);
  }
  const series: Series[] = files.map((file, i) => {
    const table = readCsv(join(dir, file));
    const beta = column(table, "beta");
    const err = column(table, "nrmse");
    const positive = beta.values.filter((b) => b > 0);
    const zeroPos = positive.length > 0 ? Math.min(...positive) / 10 : 1e-6;
    return {
      label: basename(file, ".csv").replace("sweep_", ""),
      x: beta.values.map((b) => (b === 0 ? zeroPos : b)),
      y: err.values,
      rawX: beta.raw,
      rawY: err.raw,
      color: COLORS[i % COLORS.length],
      markers: true,
    };
  });
  const panel = linePanel(series, {
    title: "reconstruction error vs regularization strength",
    xLabel: "beta (0 drawn at left edge)",
    yLabel: "nrmse",
    logX: true,
    width: 2 * PANEL_W,
    height: PANEL_H + 60,
  });
  return document([`<g>${panel}</g>`], 2 * PANEL_W, PANEL_H + 60);
}

const RENDERERS: Record<FigureKind, (dir: string) => string> = {
  "trajectories": renderTrajectories,
  "histograms": renderHistograms,
  "deconv-overlay": renderDeconvOverlay,
  "image-grid": renderImageGrid,
  "beta-sweep": renderBetaSweep,
};

export function render(spec: FigureSpec): string {
  const renderer = RENDERERS[spec.kind];
  if (!renderer) {
    throw new Error(`unknown figure kind '${spec.kind}'`);
  }
  return renderer(spec.inputDir);
}

export const FIGURE_KINDS = Object.keys(RENDERERS) as FigureKind[];
