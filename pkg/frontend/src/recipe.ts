/**
 * Figure recipe: the same flat key=value format the simulation CLI uses.
 *
 * Required keys: field_csv, traj_csv, out.
 * Optional: colormap (positive|signed, default positive), xlabel, tlabel,
 * width, height, inset=t0,t1,x0,x1 (adds a zoomed second panel).
 */

import { readFileSync } from "fs";

export type ColormapMode = "positive" | "signed";

export interface FigureRecipe {
  fieldCsv: string;
  trajCsv: string;
  out: string;
  colormap: ColormapMode;
  xlabel: string;
  tlabel: string;
  width: number;
  height: number;
  inset?: [number, number, number, number];
}

export class RecipeError extends Error {}

const KNOWN_KEYS = new Set([
  "field_csv", "traj_csv", "out", "colormap", "xlabel", "tlabel",
  "width", "height", "inset",
]);

export function parseRecipe(text: string): FigureRecipe {
  const raw = new Map<string, string>();
  const lines = text.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === "" || line.startsWith("#")) continue;
    const eq = line.indexOf("=");
    if (eq < 0) throw new RecipeError(`line ${i + 1}: expected key=value, got '${line}'`);
    const key = line.slice(0, eq).trim();
    const value = line.slice(eq + 1).trim();
    if (!KNOWN_KEYS.has(key)) throw new RecipeError(`line ${i + 1}: unknown key '${key}'`);
    if (raw.has(key)) throw new RecipeError(`line ${i + 1}: duplicate key '${key}'`);
    raw.set(key, value);
  }
  for (const required of ["field_csv", "traj_csv", "out"]) {
    if (!raw.has(required)) throw new RecipeError(`missing required key '${required}'`);
  }
  const colormap = (raw.get("colormap") ?? "positive") as ColormapMode;
  if (colormap !== "positive" && colormap !== "signed") {
    throw new RecipeError(`colormap must be positive|signed, got '${colormap}'`);
  }
  const num = (key: string, fallback: number): number => {
    if (!raw.has(key)) return fallback;
    const v = Number(raw.get(key));
    if (!Number.isFinite(v) || v <= 0) throw new RecipeError(`key '${key}' expects a positive number`);
    return v;
  };
  let inset: [number, number, number, number] | undefined;
  if (raw.has("inset")) {
    const parts = raw.get("inset")!.split(",").map((s) => Number(s.trim()));
    if (parts.length !== 4 || parts.some((v) => !Number.isFinite(v))) {
      throw new RecipeError("inset expects four numbers: t0,t1,x0,x1");
    }
    if (parts[1] <= parts[0] || parts[3] <= parts[2]) {
      throw new RecipeError("inset expects t1 > t0 and x1 > x0");
    }
    inset = [parts[0], parts[1], parts[2], parts[3]];
  }
  return {
    fieldCsv: raw.get("field_csv")!,
    trajCsv: raw.get("traj_csv")!,
    out: raw.get("out")!,
    colormap,
    xlabel: raw.get("xlabel") ?? "x [1/sigma]",
    tlabel: raw.get("tlabel") ?? "t [1/sigma]",
    width: Math.round(num("width", 720)),
    height: Math.round(num("height", 540)),
    inset,
  };
}

export function loadRecipe(path: string): FigureRecipe {
  return parseRecipe(readFileSync(path, "utf-8"));
}
