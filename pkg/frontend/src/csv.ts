/**
 * Readers for the simulation CLI's CSV outputs.
 *
 * Field CSV: header `t,x,re_psi,im_psi,j,rho,V`, row-major over a complete
 * rectangular lattice (t outer, x inner).  Trajectory CSV: header
 * `traj_id,t,x,status`, rows grouped by trajectory in sample order.
 * Any header or lattice mismatch raises SchemaError.
 */

import { readFileSync } from "fs";

export class SchemaError extends Error {}

export interface FieldGrid {
  ts: Float64Array;          // distinct times, ascending
  xs: Float64Array;          // distinct positions, ascending
  rho: Float64Array;         // [it * nx + ix]
  v: Float64Array;           // same layout; NaN where undefined
  minRho: number;
  maxRho: number;
}

export interface TrajectoryLine {
  id: number;
  t: Float64Array;
  x: Float64Array;
  status: string;
}

const FIELD_HEADER = "t,x,re_psi,im_psi,j,rho,V";
const TRAJ_HEADER = "traj_id,t,x,status";

function splitLines(text: string, path: string): string[] {
  const lines = text.split("\n");
  while (lines.length && lines[lines.length - 1].trim() === "") lines.pop();
  if (lines.length < 2) throw new SchemaError(`${path}: no data rows`);
  return lines;
}

export function readFieldCsv(path: string): FieldGrid {
  const lines = splitLines(readFileSync(path, "utf-8"), path);
  if (lines[0].trim() !== FIELD_HEADER) {
    throw new SchemaError(`${path}: expected header '${FIELD_HEADER}', got '${lines[0].trim()}'`);
  }
  const n = lines.length - 1;
  const t = new Float64Array(n);
  const x = new Float64Array(n);
  const rho = new Float64Array(n);
  const v = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    const parts = lines[i + 1].split(",");
    if (parts.length !== 7) {
      throw new SchemaError(`${path}: row ${i + 2} has ${parts.length} columns, expected 7`);
    }
    t[i] = Number(parts[0]);
    x[i] = Number(parts[1]);
    rho[i] = Number(parts[5]);
    v[i] = parts[6] === "nan" ? NaN : Number(parts[6]);
    if (!Number.isFinite(t[i]) || !Number.isFinite(x[i]) || !Number.isFinite(rho[i])) {
      throw new SchemaError(`${path}: row ${i + 2} is not numeric`);
    }
  }
  // Recover the lattice: x cycles fastest.
  let nx = 1;
  while (nx < n && t[nx] === t[0]) nx++;
  const nt = n / nx;
  if (!Number.isInteger(nt)) {
    throw new SchemaError(`${path}: ${n} rows do not form a complete lattice`);
  }
  const ts = new Float64Array(nt);
  const xs = new Float64Array(nx);
  for (let ix = 0; ix < nx; ix++) xs[ix] = x[ix];
  for (let it = 0; it < nt; it++) {
    ts[it] = t[it * nx];
    for (let ix = 0; ix < nx; ix++) {
      if (t[it * nx + ix] !== ts[it] || x[it * nx + ix] !== xs[ix]) {
        throw new SchemaError(`${path}: rows are not in row-major lattice order`);
      }
    }
  }
  let minRho = Infinity;
  let maxRho = -Infinity;
  for (let i = 0; i < n; i++) {
    if (rho[i] < minRho) minRho = rho[i];
    if (rho[i] > maxRho) maxRho = rho[i];
  }
  return { ts, xs, rho, v, minRho, maxRho };
}

export function readTrajCsv(path: string): TrajectoryLine[] {
  const lines = splitLines(readFileSync(path, "utf-8"), path);
  if (lines[0].trim() !== TRAJ_HEADER) {
    throw new SchemaError(`${path}: expected header '${TRAJ_HEADER}', got '${lines[0].trim()}'`);
  }
  const byId = new Map<number, { t: number[]; x: number[]; status: string }>();
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== 4) {
      throw new SchemaError(`${path}: row ${i + 1} has ${parts.length} columns, expected 4`);
    }
    const id = Number(parts[0]);
    const t = Number(parts[1]);
    const x = Number(parts[2]);
    if (!Number.isInteger(id) || !Number.isFinite(t) || !Number.isFinite(x)) {
      throw new SchemaError(`${path}: row ${i + 1} is not numeric`);
    }
    let entry = byId.get(id);
    if (!entry) {
      entry = { t: [], x: [], status: parts[3] };
      byId.set(id, entry);
    }
    entry.t.push(t);
    entry.x.push(x);
  }
  return [...byId.entries()]
    .sort((a, b) => a[0] - b[0])
    .map(([id, e]) => ({
      id,
      t: Float64Array.from(e.t),
      x: Float64Array.from(e.x),
      status: e.status,
    }));
}
