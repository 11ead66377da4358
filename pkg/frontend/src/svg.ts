/**
 * Minimal deterministic SVG plotting: linear/log scales with tick
 * generation, line/scatter/bar panels, and a document assembler.  No
 * numeric processing beyond mapping data coordinates to pixels.
 */

export interface Scale {
  map(v: number): number;
  ticks(): number[];
  domain: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  let [d0, d1] = domain;
  if (d0 === d1) {
    d0 -= 0.5;
    d1 += 0.5;
  }
  const k = (range[1] - range[0]) / (d1 - d0);
  return {
    domain: [d0, d1],
    map: (v) => range[0] + (v - d0) * k,
    ticks: () => niceLinearTicks(d0, d1),
  };
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const lo = Math.log10(domain[0]);
  const hi = Math.log10(domain[1]);
  const inner = linearScale([lo, hi], range);
  return {
    domain,
    map: (v) => inner.map(Math.log10(v)),
    ticks: () => {
      const ticks: number[] = [];
      for (let e = Math.ceil(lo); e <= Math.floor(hi); e++) {
        ticks.push(Math.pow(10, e));
      }
      if (ticks.length < 2) {
        return [domain[0], domain[1]];
      }
      while (ticks.length > 8) {
        ticks.splice(1, 1);
      }
      return ticks;
    },
  };
}

function niceLinearTicks(lo: number, hi: number, count = 5): number[] {
  const span = hi - lo;
  const rawStep = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= count + 1)!;
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0);
  return String(Math.round(v * 1e6) / 1e6);
}

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/"/g, "&quot;");

export interface Series {
  label: string;
  x: number[];
  y: number[];
  rawX: string[];
  rawY: string[];
  color: string;
  markers?: boolean;
}

export interface PanelOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  logX?: boolean;
  logY?: boolean;
  width: number;
  height: number;
}

const MARGIN = { left: 62, right: 12, top: 26, bottom: 40 };

function extent(series: Series[], pick: (s: Series) => number[],
                positiveOnly: boolean): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of series) {
    for (const v of pick(s)) {
      if (!Number.isFinite(v) || (positiveOnly && v <= 0)) continue;
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (!(lo < Infinity)) {
    throw new Error("panel has no finite data to plot");
  }
  return [lo, hi];
}

/** A single axes panel with polyline series; data tokens are embedded in
 * data-x/data-y attributes exactly as read from the source file. */
export function linePanel(series: Series[], opts: PanelOptions): string {
  const w = opts.width - MARGIN.left - MARGIN.right;
  const h = opts.height - MARGIN.top - MARGIN.bottom;
  const [xlo, xhi] = extent(series, (s) => s.x, Boolean(opts.logX));
  const [ylo, yhi] = extent(series, (s) => s.y, Boolean(opts.logY));
  const sx = opts.logX ? logScale([xlo, xhi], [0, w]) : linearScale([xlo, xhi], [0, w]);
  const sy = opts.logY ? logScale([ylo, yhi], [h, 0]) : linearScale([ylo, yhi], [h, 0]);

  const parts: string[] = [];
  parts.push(`<g class="panel" transform="translate(${MARGIN.left},${MARGIN.top})">`);
  parts.push(`<text class="title" x="${w / 2}" y="-10" text-anchor="middle">${esc(opts.title)}</text>`);
  parts.push(`<rect x="0" y="0" width="${w}" height="${h}" fill="none" stroke="#444"/>`);
  for (const t of sx.ticks()) {
    const px = sx.map(t);
    if (px < -1e-6 || px > w + 1e-6) continue;
    parts.push(`<line x1="${px}" y1="${h}" x2="${px}" y2="${h + 4}" stroke="#444"/>`);
    parts.push(`<text x="${px}" y="${h + 16}" text-anchor="middle" class="tick">${fmtTick(t)}</text>`);
  }
  for (const t of sy.ticks()) {
    const py = sy.map(t);
    if (py < -1e-6 || py > h + 1e-6) continue;
    parts.push(`<line x1="-4" y1="${py}" x2="0" y2="${py}" stroke="#444"/>`);
    parts.push(`<text x="-7" y="${py + 3}" text-anchor="end" class="tick">${fmtTick(t)}</text>`);
  }
  parts.push(`<text x="${w / 2}" y="${h + 32}" text-anchor="middle" class="label">${esc(opts.xLabel)}</text>`);
  parts.push(`<text transform="translate(${-46},${h / 2}) rotate(-90)" text-anchor="middle" class="label">${esc(opts.yLabel)}</text>`);

  series.forEach((s, idx) => {
    const pts: string[] = [];
    for (let i = 0; i < s.x.length; i++) {
      if (!Number.isFinite(s.x[i]) || !Number.isFinite(s.y[i])) continue;
      if (opts.logX && s.x[i] <= 0) continue;
      if (opts.logY && s.y[i] <= 0) continue;
      pts.push(`${sx.map(s.x[i])},${sy.map(s.y[i])}`);
    }
    const dataX = esc(s.rawX.join(" "));
    const dataY = esc(s.rawY.join(" "));
    parts.push(
      `<polyline class="series" data-label="${esc(s.label)}" data-x="${dataX}" ` +
      `data-y="${dataY}" fill="none" stroke="${s.color}" stroke-width="1.4" ` +
      `points="${pts.join(" ")}"/>`,
    );
    if (s.markers) {
      for (let i = 0; i < s.x.length; i++) {
        if (!Number.isFinite(s.y[i]) || (opts.logY && s.y[i] <= 0)) continue;
        if (opts.logX && s.x[i] <= 0) continue;
        parts.push(`<circle cx="${sx.map(s.x[i])}" cy="${sy.map(s.y[i])}" r="2.4" fill="${s.color}"/>`);
      }
    }
    parts.push(
      `<text x="${w - 6}" y="${14 * (idx + 1)}" text-anchor="end" fill="${s.color}" ` +
      `class="legend">${esc(s.label)}</text>`,
    );
  });
  parts.push("</g>");
  return parts.join("\n");
}

export interface BarPanelOptions {
  title: string;
  width: number;
  height: number;
}

/** Histogram bars over [0,1]; raw bin tokens ride along as data attributes. */
export function barPanel(lo: number[], hi: number[], counts: number[],
                         raw: { lo: string[]; hi: string[]; count: string[] },
                         opts: BarPanelOptions): string {
  const w = opts.width - MARGIN.left - MARGIN.right;
  const h = opts.height - MARGIN.top - MARGIN.bottom;
  const top = Math.max(...counts, 1);
  const sx = linearScale([lo[0], hi[hi.length - 1]], [0, w]);
  const sy = linearScale([0, top], [h, 0]);
  const parts: string[] = [];
  parts.push(`<g class="panel" transform="translate(${MARGIN.left},${MARGIN.top})">`);
  parts.push(`<text class="title" x="${w / 2}" y="-10" text-anchor="middle">${esc(opts.title)}</text>`);
  parts.push(`<rect x="0" y="0" width="${w}" height="${h}" fill="none" stroke="#444"/>`);
  parts.push(
    `<g class="bars" data-lo="${esc(raw.lo.join(" "))}" data-hi="${esc(raw.hi.join(" "))}" ` +
    `data-count="${esc(raw.count.join(" "))}">`,
  );
  for (let i = 0; i < counts.length; i++) {
    const x0 = sx.map(lo[i]);
    const x1 = sx.map(hi[i]);
    const y = sy.map(counts[i]);
    parts.push(
      `<rect x="${x0}" y="${y}" width="${x1 - x0}" height="${h - y}" ` +
      `fill="#4878b0" stroke="#2a4a72" stroke-width="0.4"/>`,
    );
  }
  parts.push("</g>");
  for (const t of sx.ticks()) {
    parts.push(`<text x="${sx.map(t)}" y="${h + 16}" text-anchor="middle" class="tick">${fmtTick(t)}</text>`);
  }
  for (const t of sy.ticks()) {
    parts.push(`<text x="-7" y="${sy.map(t) + 3}" text-anchor="end" class="tick">${fmtTick(t)}</text>`);
  }
  parts.push("</g>");
  return parts.join("\n");
}

/** Grayscale image panel: one rect per pixel, exact source gray levels. */
export function imagePanel(pixels: number[], width: number, height: number,
                           maxval: number, title: string, cell: number): string {
  const parts: string[] = [];
  parts.push(`<g class="image" data-width="${width}" data-height="${height}" data-maxval="${maxval}">`);
  parts.push(`<text class="title" x="${(width * cell) / 2}" y="-5" text-anchor="middle">${esc(title)}</text>`);
  for (let r = 0; r < height; r++) {
    for (let c = 0; c < width; c++) {
      const v = pixels[r * width + c];
      const g = Math.round((255 * v) / maxval);
      parts.push(
        `<rect x="${c * cell}" y="${r * cell}" width="${cell}" height="${cell}" ` +
        `fill="rgb(${g},${g},${g})" data-v="${v}"/>`,
      );
    }
  }
  parts.push("</g>");
  return parts.join("\n");
}

export function document(body: string[], width: number, height: number): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    `<style>.title{font-size:12px}.tick{font-size:9px}.label{font-size:11px}` +
    `.legend{font-size:10px}</style>`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    ...body,
    "</svg>",
  ].join("\n");
}

export const COLORS = ["#c44e52", "#4c72b0", "#55a868", "#8172b3", "#937860"];
