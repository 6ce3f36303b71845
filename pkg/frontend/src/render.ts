/** Figure renderers for each documented output kind. */
import * as fs from "node:fs";
import * as path from "node:path";

import { column, readMatrix, readTable, SchemaError } from "./csv.js";
import { diverging, sequential } from "./color.js";
import { extent, fmt, linearScale } from "./scale.js";
import { readGrid, readSnapshot } from "./snapshot.js";
import { drawColorbar, drawFrame, HEIGHT, MARGIN, Svg, WIDTH } from "./svg.js";

export interface RenderRequest {
  kind: "trace" | "comparison" | "spectrogram" | "snapshot" | "ratio_map";
  inputs: string[];
  output: string;
  bandwidth?: number;
  title?: string;
}

export function render(req: RenderRequest): void {
  let svg: Svg;
  switch (req.kind) {
    case "trace":
      svg = renderTrace(req);
      break;
    case "comparison":
      svg = renderComparison(req);
      break;
    case "spectrogram":
      svg = renderSpectrogram(req);
      break;
    case "snapshot":
      svg = renderField(req, diverging, "field value");
      break;
    case "ratio_map":
      svg = renderField(req, sequential, "|U_r| / |U| (time average)");
      break;
    default:
      throw new SchemaError(`unknown figure kind '${(req as RenderRequest).kind}'`);
  }
  fs.mkdirSync(path.dirname(path.resolve(req.output)), { recursive: true });
  fs.writeFileSync(req.output, svg.toString());
}

function needInputs(req: RenderRequest, n: number, what: string): void {
  if (req.inputs.length !== n) {
    throw new SchemaError(
      `kind '${req.kind}' expects ${n} input(s): ${what}; got ${req.inputs.length}`,
    );
  }
}

/** Receiver/trace CSV: time_s plus one quantity column. */
function renderTrace(req: RenderRequest): Svg {
  needInputs(req, 1, "receiver CSV");
  const table = readTable(req.inputs[0]);
  const t = column(table, "time_s", req.inputs[0]);
  const name = table.header.find((h) => h !== "time_s");
  if (!name) throw new SchemaError(`${req.inputs[0]}: no quantity column`);
  const y = column(table, name, req.inputs[0]);
  const svg = new Svg();
  const frame = drawFrame(svg, extent(t), pad(extent(y)), {
    x: "time (s)",
    y: name,
    title: req.title ?? path.basename(req.inputs[0]),
  });
  svg.path(t.map((ti, i) => [frame.x.map(ti), frame.y.map(y[i])]), "#1f77b4");
  return svg;
}

/** Comparison report: the two displacements overlaid plus the difference. */
function renderComparison(req: RenderRequest): Svg {
  needInputs(req, 1, "comparison report CSV");
  const src = req.inputs[0];
  const table = readTable(src);
  const t = column(table, "time_s", src);
  const dv = column(table, "displacement_velocity_m", src);
  const dp = column(table, "displacement_potential_m", src);
  const diff = column(table, "abs_difference_m", src);
  const svg = new Svg();
  const split = HEIGHT * 0.58;
  const topFrame = drawFrame(
    svg,
    extent(t),
    pad(extent([...dv, ...dp])),
    { x: "", y: "displacement (m)", title: req.title ?? "formulation comparison" },
    { left: MARGIN.left, right: WIDTH - MARGIN.right, top: MARGIN.top, bottom: split - 16 },
  );
  svg.path(t.map((ti, i) => [topFrame.x.map(ti), topFrame.y.map(dv[i])]), "#1f77b4");
  svg.path(t.map((ti, i) => [topFrame.x.map(ti), topFrame.y.map(dp[i])]), "#ff7f0e");
  svg.text(WIDTH - MARGIN.right - 10, MARGIN.top + 14, "velocity field",
    { anchor: "end", fill: "#1f77b4", size: 11 });
  svg.text(WIDTH - MARGIN.right - 10, MARGIN.top + 28, "potential based",
    { anchor: "end", fill: "#ff7f0e", size: 11 });
  const botFrame = drawFrame(
    svg,
    extent(t),
    pad([0, Math.max(...diff) || 1]),
    { x: "time (s)", y: "|difference| (m)" },
    { left: MARGIN.left, right: WIDTH - MARGIN.right, top: split + 24, bottom: HEIGHT - MARGIN.bottom },
  );
  svg.path(t.map((ti, i) => [botFrame.x.map(ti), botFrame.y.map(diff[i])]), "#2ca02c");
  return svg;
}

/** Spectrogram CSVs: magnitude matrix plus time and frequency axis files. */
function renderSpectrogram(req: RenderRequest): Svg {
  needInputs(req, 3, "magnitude CSV, times CSV, freqs CSV");
  const [magPath, timesPath, freqsPath] = req.inputs;
  const mag = readMatrix(magPath);
  const t = column(readTable(timesPath), "time_s", timesPath);
  const f = column(readTable(freqsPath), "freq_hz", freqsPath);
  if (mag.length !== f.length || mag[0].length !== t.length) {
    throw new SchemaError(
      `${magPath}: magnitude is ${mag.length}x${mag[0].length}, axes are ` +
        `${f.length} freqs x ${t.length} times`,
    );
  }
  const svg = new Svg();
  // log scaling spans 4 decades below the peak
  let peak = 0;
  for (const row of mag) for (const v of row) peak = Math.max(peak, v);
  const floor = peak > 0 ? peak * 1e-4 : 1;
  const frame = drawFrame(svg, extent(t), extent(f), {
    x: "time (s)",
    y: "frequency (Hz)",
    title: req.title ?? path.basename(magPath),
  });
  const x0 = frame.x.range[0];
  const cellW = (frame.x.range[1] - x0) / t.length;
  for (let j = 0; j < t.length; j++) {
    for (let i = 0; i < f.length; i++) {
      const v = Math.max(mag[i][j], floor);
      const u = Math.log10(v / floor) / 4;
      const y1 = frame.y.map(f[Math.min(i + 1, f.length - 1)]);
      const y0 = frame.y.map(f[i]);
      svg.rect(x0 + j * cellW, Math.min(y0, y1), cellW + 0.5,
        Math.abs(y0 - y1) + 0.5, sequential(u));
    }
  }
  if (req.bandwidth && req.bandwidth > 0) {
    // annotate the measured interference bandwidth as guide lines
    const [flo, fhi] = extent(f);
    for (let fv = req.bandwidth; fv <= fhi; fv += req.bandwidth) {
      if (fv < flo) continue;
      const py = frame.y.map(fv);
      svg.line(frame.x.range[0], py, frame.x.range[1], py, "white", 0.8);
    }
    svg.text(frame.x.range[1] - 8,
      frame.y.map(req.bandwidth) - 5,
      `bandwidth ${fmt(req.bandwidth, 3)} Hz`,
      { anchor: "end", fill: "white", size: 11 });
  }
  drawColorbar(svg, sequential, [0, 1], "log magnitude (4 decades)");
  return svg;
}

/** Snapshot/ratio field over the structured grid. */
function renderField(
  req: RenderRequest,
  colormap: (t: number) => string,
  label: string,
): Svg {
  needInputs(req, 2, "grid snapshot, field snapshot");
  const [gridPath, fieldPath] = req.inputs;
  const grid = readGrid(gridPath);
  const snap = readSnapshot(fieldPath);
  if (snap.nx !== grid.nx || snap.nz !== grid.nz) {
    throw new SchemaError(
      `${fieldPath}: field is ${snap.nx}x${snap.nz}, grid is ${grid.nx}x${grid.nz}`,
    );
  }
  const svg = new Svg();
  const [xlo, xhi] = extent(grid.x);
  const [zlo, zhi] = extent(grid.z);
  let vmax = 0;
  for (const v of snap.values) vmax = Math.max(vmax, Math.abs(v));
  if (vmax === 0) vmax = 1;
  const signed = colormap === diverging;
  const domain: [number, number] = signed ? [-vmax, vmax] : [0, vmax];
  const frame = drawFrame(svg, [xlo, xhi], [zlo, zhi], {
    x: "x (m)",
    y: "z (m)",
    title: req.title ?? `${snap.name} at t = ${fmt(snap.time, 5)} s`,
  });
  // deterministic decimation keeps the file size bounded
  const stepX = Math.max(1, Math.ceil(grid.nx / 480));
  const stepZ = Math.max(1, Math.ceil(grid.nz / 160));
  const scaleT = linearScale(domain, [0, 1]);
  for (let ix = 0; ix < grid.nx; ix += stepX) {
    const ix1 = Math.min(ix + stepX, grid.nx - 1);
    for (let iz = 0; iz < grid.nz; iz += stepZ) {
      const iz1 = Math.min(iz + stepZ, grid.nz - 1);
      const gid = ix * grid.nz + iz;
      const x0 = frame.x.map(grid.x[ix * grid.nz]);
      const x1 = frame.x.map(grid.x[ix1 * grid.nz]);
      const y0 = frame.y.map(grid.z[gid]);
      const y1 = frame.y.map(grid.z[ix * grid.nz + iz1]);
      const v = snap.values[gid];
      svg.rect(Math.min(x0, x1), Math.min(y0, y1),
        Math.abs(x1 - x0) + 0.6, Math.abs(y1 - y0) + 0.6,
        colormap(scaleT.map(v)));
    }
  }
  drawColorbar(svg, colormap, domain, label);
  return svg;
}

function pad([lo, hi]: [number, number], f = 0.06): [number, number] {
  const d = (hi - lo) * f || 1e-12;
  return [lo - d, hi + d];
}
