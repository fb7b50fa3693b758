import { Series } from "./transforms.js";

/** Deterministic vector rendering: same inputs, byte-identical SVG. */

const WIDTH = 720;
const HEIGHT = 520;
const MARGIN = { top: 48, right: 32, bottom: 64, left: 84 };
const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

interface Extent {
  min: number;
  max: number;
}

function extent(values: number[]): Extent {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  const pad = 0.04 * (max - min);
  return { min: min - pad, max: max + pad };
}

function ticks(ext: Extent, count = 6): number[] {
  const span = ext.max - ext.min;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = (span / count) / step;
  const nice = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const inc = nice * step;
  const start = Math.ceil(ext.min / inc) * inc;
  const out: number[] = [];
  for (let v = start; v <= ext.max + 1e-12 * span; v += inc) out.push(v);
  return out;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(2);
  return String(parseFloat(v.toPrecision(6)));
}

export interface PlotOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  markersOnly?: boolean;
}

export function renderSvg(series: Series[], opts: PlotOptions): string {
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y);
  const xe = extent(xs);
  const ye = extent(ys);
  const iw = WIDTH - MARGIN.left - MARGIN.right;
  const ih = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (v: number) => MARGIN.left + ((v - xe.min) / (xe.max - xe.min)) * iw;
  const sy = (v: number) => MARGIN.top + ih - ((v - ye.min) / (ye.max - ye.min)) * ih;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(`<text x="${WIDTH / 2}" y="28" text-anchor="middle" font-size="17">${escapeXml(opts.title)}</text>`);

  for (const t of ticks(xe)) {
    const px = sx(t);
    parts.push(`<line x1="${r(px)}" y1="${MARGIN.top}" x2="${r(px)}" y2="${MARGIN.top + ih}" stroke="#e0e0e0" stroke-width="1"/>`);
    parts.push(`<text x="${r(px)}" y="${MARGIN.top + ih + 20}" text-anchor="middle" font-size="12">${fmt(t)}</text>`);
  }
  for (const t of ticks(ye)) {
    const py = sy(t);
    parts.push(`<line x1="${MARGIN.left}" y1="${r(py)}" x2="${MARGIN.left + iw}" y2="${r(py)}" stroke="#e0e0e0" stroke-width="1"/>`);
    parts.push(`<text x="${MARGIN.left - 8}" y="${r(py) + 4}" text-anchor="end" font-size="12">${fmt(t)}</text>`);
  }
  parts.push(`<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${iw}" height="${ih}" fill="none" stroke="#333" stroke-width="1"/>`);
  parts.push(`<text x="${MARGIN.left + iw / 2}" y="${HEIGHT - 16}" text-anchor="middle" font-size="14">${escapeXml(opts.xLabel)}</text>`);
  parts.push(
    `<text x="22" y="${MARGIN.top + ih / 2}" text-anchor="middle" font-size="14" ` +
    `transform="rotate(-90 22 ${MARGIN.top + ih / 2})">${escapeXml(opts.yLabel)}</text>`,
  );

  series.forEach((s, si) => {
    const color = PALETTE[si % PALETTE.length];
    if (!opts.markersOnly && s.x.length > 1) {
      const path = s.x.map((v, i) => `${r(sx(v))},${r(sy(s.y[i]))}`).join(" ");
      parts.push(`<polyline points="${path}" fill="none" stroke="${color}" stroke-width="1.6"/>`);
    }
    s.x.forEach((v, i) => {
      parts.push(`<circle cx="${r(sx(v))}" cy="${r(sy(s.y[i]))}" r="3" fill="${color}"/>`);
    });
    const ly = MARGIN.top + 14 + 18 * si;
    parts.push(`<line x1="${MARGIN.left + iw - 120}" y1="${ly - 4}" x2="${MARGIN.left + iw - 96}" y2="${ly - 4}" stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${MARGIN.left + iw - 90}" y="${ly}" font-size="12">${escapeXml(s.label)}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function r(v: number): string {
  return v.toFixed(3);
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
