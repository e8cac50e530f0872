/**
 * Rasterizer: density heatmap with white trajectory overlays and axes in
 * bandwidth units; optional zoomed inset panel below the main one.
 *
 * Rendering is read-only on its inputs and deterministic: the same CSVs and
 * recipe produce identical PNG bytes.
 */

import { writeFileSync } from "fs";

import { FieldGrid, TrajectoryLine, readFieldCsv, readTrajCsv } from "./csv";
import { positiveColor, signedColor } from "./colormap";
import { Canvas, drawText, setPixel, textWidth } from "./font";
import { encodePng } from "./png";
import { FigureRecipe, RecipeError } from "./recipe";

const MARGIN_LEFT = 56;
const MARGIN_RIGHT = 74;
const MARGIN_TOP = 16;
const MARGIN_BOTTOM = 36;
const PANEL_GAP = 28;

// Exact densities carry interference residue a hair below zero even in
// frames where the density is a probability; the positive colormap clamps
// dips shallower than this fraction of the peak and rejects deeper ones.
export const DISPLAY_NEGATIVE_TOL = 5e-3;

export interface Window2D {
  t0: number;
  t1: number;
  x0: number;
  x1: number;
}

export interface PanelGeometry {
  window: Window2D;
  px0: number;
  py0: number;
  w: number;
  h: number;
}

export interface RenderResult {
  canvas: Canvas;
  panels: PanelGeometry[];
  limit: number; // colour scale: max rho (positive) or max |rho| (signed)
}

export function dataToPixel(p: PanelGeometry, t: number, x: number): [number, number] {
  const fx = (x - p.window.x0) / (p.window.x1 - p.window.x0);
  const ft = (t - p.window.t0) / (p.window.t1 - p.window.t0);
  return [p.px0 + fx * (p.w - 1), p.py0 + (1 - ft) * (p.h - 1)];
}

function nearestIndex(values: Float64Array, v: number): number {
  let lo = 0;
  let hi = values.length - 1;
  if (v <= values[0]) return 0;
  if (v >= values[hi]) return hi;
  while (hi - lo > 1) {
    const mid = (lo + hi) >> 1;
    if (values[mid] <= v) lo = mid;
    else hi = mid;
  }
  return v - values[lo] <= values[hi] - v ? lo : hi;
}

function niceTicks(lo: number, hi: number, target = 6): number[] {
  const span = hi - lo;
  const rawStep = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (rawStep <= m * mag) {
      step = m * mag;
      break;
    }
  }
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

function formatTick(v: number): string {
  if (v === 0) return "0";
  const rounded = Number(v.toPrecision(6));
  return String(rounded);
}

function formatScale(v: number): string {
  if (v === 0) return "0";
  const exp = Math.floor(Math.log10(Math.abs(v)));
  if (exp >= -2 && exp <= 3) return String(Number(v.toPrecision(3)));
  const mant = Number((v / Math.pow(10, exp)).toPrecision(3));
  return `${mant}e${exp}`;
}

/** Liang-Barsky segment clip against a panel window; null if fully outside. */
function clipSegment(w: Window2D, t0: number, x0: number, t1: number, x1: number):
    [number, number, number, number] | null {
  let u0 = 0;
  let u1 = 1;
  const dt = t1 - t0;
  const dx = x1 - x0;
  const checks: Array<[number, number]> = [
    [-dt, t0 - w.t0],
    [dt, w.t1 - t0],
    [-dx, x0 - w.x0],
    [dx, w.x1 - x0],
  ];
  for (const [p, q] of checks) {
    if (p === 0) {
      if (q < 0) return null;
    } else {
      const r = q / p;
      if (p < 0) {
        if (r > u1) return null;
        if (r > u0) u0 = r;
      } else {
        if (r < u0) return null;
        if (r < u1) u1 = r;
      }
    }
  }
  return [t0 + u0 * dt, x0 + u0 * dx, t0 + u1 * dt, x0 + u1 * dx];
}

function drawLine(c: Canvas, x0: number, y0: number, x1: number, y1: number): void {
  let ix0 = Math.round(x0);
  let iy0 = Math.round(y0);
  const ix1 = Math.round(x1);
  const iy1 = Math.round(y1);
  const dx = Math.abs(ix1 - ix0);
  const dy = -Math.abs(iy1 - iy0);
  const sx = ix0 < ix1 ? 1 : -1;
  const sy = iy0 < iy1 ? 1 : -1;
  let err = dx + dy;
  for (;;) {
    setPixel(c, ix0, iy0, 255, 255, 255);
    if (ix0 === ix1 && iy0 === iy1) break;
    const e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      ix0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      iy0 += sy;
    }
  }
}

function drawPanel(c: Canvas, field: FieldGrid, trajs: TrajectoryLine[],
                   recipe: FigureRecipe, geo: PanelGeometry, limit: number): void {
  const { window: win, px0, py0, w, h } = geo;
  // --- heatmap: nearest grid cell per pixel ---
  const colToIx = new Int32Array(w);
  for (let col = 0; col < w; col++) {
    const x = win.x0 + ((col + 0.5) / w) * (win.x1 - win.x0);
    colToIx[col] = nearestIndex(field.xs, x);
  }
  const nx = field.xs.length;
  for (let row = 0; row < h; row++) {
    const t = win.t1 - ((row + 0.5) / h) * (win.t1 - win.t0);
    const it = nearestIndex(field.ts, t);
    for (let col = 0; col < w; col++) {
      const rho = field.rho[it * nx + colToIx[col]];
      const [r, g, b] = recipe.colormap === "signed"
        ? signedColor(rho, limit)
        : positiveColor(Math.max(rho, 0), limit);
      setPixel(c, px0 + col, py0 + row, r, g, b);
    }
  }
  // --- trajectories as white polylines (may run backward in t) ---
  for (const traj of trajs) {
    for (let i = 0; i + 1 < traj.t.length; i++) {
      const seg = clipSegment(win, traj.t[i], traj.x[i], traj.t[i + 1], traj.x[i + 1]);
      if (!seg) continue;
      const [pax, pay] = dataToPixel(geo, seg[0], seg[1]);
      const [pbx, pby] = dataToPixel(geo, seg[2], seg[3]);
      drawLine(c, pax, pay, pbx, pby);
    }
  }
  // --- frame ---
  for (let col = -1; col <= w; col++) {
    setPixel(c, px0 + col, py0 - 1, 0, 0, 0);
    setPixel(c, px0 + col, py0 + h, 0, 0, 0);
  }
  for (let row = -1; row <= h; row++) {
    setPixel(c, px0 - 1, py0 + row, 0, 0, 0);
    setPixel(c, px0 + w, py0 + row, 0, 0, 0);
  }
  // --- ticks and labels ---
  for (const tick of niceTicks(win.x0, win.x1)) {
    const [px] = dataToPixel(geo, win.t0, tick);
    const ipx = Math.round(px);
    for (let d = 1; d <= 4; d++) setPixel(c, ipx, py0 + h + d, 0, 0, 0);
    const label = formatTick(tick);
    drawText(c, ipx - Math.floor(textWidth(label) / 2), py0 + h + 7, label);
  }
  for (const tick of niceTicks(win.t0, win.t1)) {
    const [, py] = dataToPixel(geo, tick, win.x0);
    const ipy = Math.round(py);
    for (let d = 1; d <= 4; d++) setPixel(c, px0 - 1 - d, ipy, 0, 0, 0);
    const label = formatTick(tick);
    drawText(c, px0 - 7 - textWidth(label), ipy - 3, label);
  }
  drawText(c, px0 + Math.floor((w - textWidth(recipe.xlabel)) / 2),
           py0 + h + 20, recipe.xlabel);
  drawText(c, Math.max(2, px0 - textWidth(recipe.tlabel) - 10), py0 - 12,
           recipe.tlabel);
}

function drawColorbar(c: Canvas, recipe: FigureRecipe, geo: PanelGeometry,
                      field: FieldGrid, limit: number): void {
  const barX = geo.px0 + geo.w + 14;
  const barW = 12;
  for (let row = 0; row < geo.h; row++) {
    const frac = 1 - row / (geo.h - 1);
    const value = recipe.colormap === "signed" ? (2 * frac - 1) * limit : frac * limit;
    const [r, g, b] = recipe.colormap === "signed"
      ? signedColor(value, limit)
      : positiveColor(value, limit);
    for (let col = 0; col < barW; col++) {
      setPixel(c, barX + col, geo.py0 + row, r, g, b);
    }
  }
  const top = recipe.colormap === "signed" ? limit : limit;
  const bottom = recipe.colormap === "signed" ? -limit : 0;
  drawText(c, barX + barW + 3, geo.py0 - 3, formatScale(top));
  drawText(c, barX + barW + 3, geo.py0 + geo.h - 4, formatScale(bottom));
  if (recipe.colormap === "signed") {
    drawText(c, barX + barW + 3, geo.py0 + Math.floor(geo.h / 2) - 3, "0");
  }
}

export function renderToCanvas(recipe: FigureRecipe): RenderResult {
  const field = readFieldCsv(recipe.fieldCsv);
  const trajs = readTrajCsv(recipe.trajCsv);
  if (recipe.colormap === "positive"
      && field.minRho < -DISPLAY_NEGATIVE_TOL * Math.max(field.maxRho, 0)) {
    throw new RecipeError(
      `field contains negative density (min ${field.minRho.toExponential(3)}); `
      + "the signed colormap is required");
  }
  const limit = recipe.colormap === "signed"
    ? Math.max(Math.abs(field.minRho), Math.abs(field.maxRho))
    : field.maxRho;

  const panels: PanelGeometry[] = [];
  const mainWindow: Window2D = {
    t0: field.ts[0], t1: field.ts[field.ts.length - 1],
    x0: field.xs[0], x1: field.xs[field.xs.length - 1],
  };
  const plotW = recipe.width - MARGIN_LEFT - MARGIN_RIGHT;
  const plotH = recipe.height - MARGIN_TOP - MARGIN_BOTTOM;
  if (plotW < 50 || plotH < 50) throw new RecipeError("figure too small for the margins");
  panels.push({ window: mainWindow, px0: MARGIN_LEFT, py0: MARGIN_TOP, w: plotW, h: plotH });
  let totalHeight = recipe.height;
  if (recipe.inset) {
    const [t0, t1, x0, x1] = recipe.inset;
    panels.push({
      window: { t0, t1, x0, x1 },
      px0: MARGIN_LEFT,
      py0: MARGIN_TOP + plotH + PANEL_GAP + MARGIN_BOTTOM,
      w: plotW,
      h: plotH,
    });
    totalHeight = recipe.height + plotH + PANEL_GAP + MARGIN_BOTTOM;
  }

  const canvas: Canvas = {
    width: recipe.width,
    height: totalHeight,
    rgb: new Uint8Array(recipe.width * totalHeight * 3).fill(255),
  };
  for (const geo of panels) {
    drawPanel(canvas, field, trajs, recipe, geo, limit);
  }
  drawColorbar(canvas, recipe, panels[0], field, limit);
  return { canvas, panels, limit };
}

export function render(recipe: FigureRecipe): RenderResult {
  const result = renderToCanvas(recipe);
  writeFileSync(recipe.out,
                encodePng(result.canvas.width, result.canvas.height, result.canvas.rgb));
  return result;
}
