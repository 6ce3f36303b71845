/** Binary field-snapshot reader (SNAP1 format).
 *
 * Layout: one ASCII header line `SNAP1 name=<f> time=<t> nx=<n> nz=<m>\n`
 * followed by nx*nz little-endian float64 values in node order
 * (gid = ix * nz + iz, iz fastest from the seabed up).  The grid companion
 * file holds two such records (x then z coordinates).
 */
import * as fs from "node:fs";

import { SchemaError } from "./csv.js";

export interface Snapshot {
  name: string;
  time: number;
  nx: number;
  nz: number;
  values: Float64Array;
}

function parseRecord(buf: Buffer, offset: number, path: string): [Snapshot, number] {
  const nl = buf.indexOf(0x0a, offset);
  if (nl < 0) throw new SchemaError(`${path}: missing snapshot header line`);
  const header = buf.subarray(offset, nl).toString("utf8");
  const parts = header.split(/\s+/);
  if (parts[0] !== "SNAP1") {
    throw new SchemaError(`${path}: bad magic '${parts[0]}' (want SNAP1)`);
  }
  const meta = new Map<string, string>();
  for (const p of parts.slice(1)) {
    const eq = p.indexOf("=");
    if (eq > 0) meta.set(p.slice(0, eq), p.slice(eq + 1));
  }
  for (const key of ["name", "time", "nx", "nz"]) {
    if (!meta.has(key)) throw new SchemaError(`${path}: header lacks '${key}'`);
  }
  const nx = Number(meta.get("nx"));
  const nz = Number(meta.get("nz"));
  const n = nx * nz;
  const start = nl + 1;
  if (buf.length < start + 8 * n) {
    throw new SchemaError(`${path}: payload truncated (${n} values expected)`);
  }
  const values = new Float64Array(n);
  for (let i = 0; i < n; i++) values[i] = buf.readDoubleLE(start + 8 * i);
  return [
    { name: meta.get("name")!, time: Number(meta.get("time")), nx, nz, values },
    start + 8 * n,
  ];
}

export function readSnapshot(path: string): Snapshot {
  const buf = fs.readFileSync(path);
  return parseRecord(buf, 0, path)[0];
}

export interface Grid {
  nx: number;
  nz: number;
  x: Float64Array;
  z: Float64Array;
}

export function readGrid(path: string): Grid {
  const buf = fs.readFileSync(path);
  const [xs, next] = parseRecord(buf, 0, path);
  const [zs] = parseRecord(buf, next, path);
  if (xs.nx !== zs.nx || xs.nz !== zs.nz) {
    throw new SchemaError(`${path}: x and z grids disagree in shape`);
  }
  return { nx: xs.nx, nz: xs.nz, x: xs.values, z: zs.values };
}
