/** CSV readers for the simulator's documented output schemas. */
import * as fs from "node:fs";

export interface Table {
  header: string[];
  columns: Map<string, number[]>;
  rows: number;
}

export class SchemaError extends Error {}

/** Parse a headered numeric CSV (receiver traces, comparison reports). */
export function readTable(path: string): Table {
  const text = fs.readFileSync(path, "utf8");
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length < 2) {
    throw new SchemaError(`${path}: expected a header line and data rows`);
  }
  const header = lines[0].split(",").map((h) => h.trim());
  const columns = new Map<string, number[]>(header.map((h) => [h, []]));
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== header.length) {
      throw new SchemaError(
        `${path}: row ${i} has ${parts.length} fields, expected ${header.length}`,
      );
    }
    for (let j = 0; j < header.length; j++) {
      const v = Number(parts[j]);
      if (!Number.isFinite(v)) {
        throw new SchemaError(`${path}: non-numeric value ${parts[j]} at row ${i}`);
      }
      columns.get(header[j])!.push(v);
    }
  }
  return { header, columns, rows: lines.length - 1 };
}

/** Fetch a column, naming it in the error when absent. */
export function column(table: Table, name: string, path = "<csv>"): number[] {
  const col = table.columns.get(name);
  if (!col) {
    throw new SchemaError(
      `${path}: missing column '${name}' (have: ${table.header.join(", ")})`,
    );
  }
  return col;
}

/** Parse a headerless numeric matrix CSV (spectrogram magnitudes). */
export function readMatrix(path: string): number[][] {
  const text = fs.readFileSync(path, "utf8");
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) throw new SchemaError(`${path}: empty matrix`);
  const out: number[][] = [];
  let width = -1;
  for (const [i, line] of lines.entries()) {
    const row = line.split(",").map(Number);
    if (row.some((v) => !Number.isFinite(v))) {
      throw new SchemaError(`${path}: non-numeric entry in row ${i}`);
    }
    if (width < 0) width = row.length;
    else if (row.length !== width) {
      throw new SchemaError(`${path}: ragged row ${i}`);
    }
    out.push(row);
  }
  return out;
}
