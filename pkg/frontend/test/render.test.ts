import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { render } from "../src/render.js";
import { snapshotBuffer } from "./snapshot.test.js";

function workdir(): string {
  return mkdtempSync(join(tmpdir(), "sqrender-"));
}

function comparisonFixture(dir: string): string {
  const p = join(dir, "comparison.csv");
  const rows = ["time_s,displacement_velocity_m,displacement_potential_m,abs_difference_m"];
  for (let i = 0; i <= 200; i++) {
    const t = i * 0.25;
    const dv = Math.sin(t / 3) * Math.exp(-t / 40);
    const dp = dv + 0.002 * Math.cos(t);
    rows.push(`${t},${dv},${dp},${Math.abs(dv - dp)}`);
  }
  writeFileSync(p, rows.join("\n") + "\n");
  return p;
}

describe("render comparison", () => {
  it("produces byte-identical SVG across invocations", () => {
    const dir = workdir();
    const input = comparisonFixture(dir);
    const out1 = join(dir, "a.svg");
    const out2 = join(dir, "b.svg");
    render({ kind: "comparison", inputs: [input], output: out1 });
    render({ kind: "comparison", inputs: [input], output: out2 });
    const a = readFileSync(out1);
    expect(a.equals(readFileSync(out2))).toBe(true);
    expect(a.toString()).toContain("<svg");
  });

  it("renders the acceptance report when present without re-running", () => {
    // criterion 3 leaves its report under out/acceptance in the repo root
    const report = join(__dirname, "..", "..", "out", "acceptance",
      "sim1_comparison.csv");
    const dir = workdir();
    const input = existsSync(report) ? report : comparisonFixture(dir);
    const out = join(dir, "cmp.svg");
    render({ kind: "comparison", inputs: [input], output: out });
    const svg = readFileSync(out, "utf8");
    expect(svg).toContain("velocity field");
    expect(svg).toContain("potential based");
  });

  it("names a missing column", () => {
    const dir = workdir();
    const p = join(dir, "bad.csv");
    writeFileSync(p, "time_s,displacement_velocity_m\n0,1\n1,2\n");
    expect(() =>
      render({ kind: "comparison", inputs: [p], output: join(dir, "x.svg") }),
    ).toThrowError(/missing column 'displacement_potential_m'/);
  });
});

describe("render trace", () => {
  it("draws a single series", () => {
    const dir = workdir();
    const p = join(dir, "trace.csv");
    const rows = ["time_s,vertical_displacement"];
    for (let i = 0; i < 100; i++) rows.push(`${i * 0.1},${Math.sin(i / 7)}`);
    writeFileSync(p, rows.join("\n") + "\n");
    const out = join(dir, "t.svg");
    render({ kind: "trace", inputs: [p], output: out });
    const svg = readFileSync(out, "utf8");
    expect(svg).toContain("vertical_displacement");
    expect(svg).toContain("time (s)");
  });
});

describe("render spectrogram", () => {
  function spectroFixture(dir: string): [string, string, string] {
    const nf = 40;
    const nt = 24;
    const magPath = join(dir, "mag.csv");
    const tPath = join(dir, "times.csv");
    const fPath = join(dir, "freqs.csv");
    const mag: string[] = [];
    for (let i = 0; i < nf; i++) {
      const row: number[] = [];
      for (let j = 0; j < nt; j++) {
        row.push(Math.abs(Math.sin((i / nf) * Math.PI * 10)) + 0.01);
      }
      mag.push(row.join(","));
    }
    writeFileSync(magPath, mag.join("\n") + "\n");
    writeFileSync(tPath, "time_s\n" +
      Array.from({ length: nt }, (_, j) => `${j * 2.5}`).join("\n") + "\n");
    writeFileSync(fPath, "freq_hz\n" +
      Array.from({ length: nf }, (_, i) => `${i * 0.5}`).join("\n") + "\n");
    return [magPath, tPath, fPath];
  }

  it("draws a heat map with a bandwidth annotation", () => {
    const dir = workdir();
    const inputs = spectroFixture(dir);
    const out = join(dir, "s.svg");
    render({ kind: "spectrogram", inputs, output: out, bandwidth: 2.0 });
    const svg = readFileSync(out, "utf8");
    expect(svg).toContain("bandwidth 2 Hz");
    expect(svg).toContain("frequency (Hz)");
  });

  it("rejects mismatched axes", () => {
    const dir = workdir();
    const [mag, t] = spectroFixture(dir);
    const badF = join(dir, "badf.csv");
    writeFileSync(badF, "freq_hz\n0\n1\n");
    expect(() =>
      render({ kind: "spectrogram", inputs: [mag, t, badF],
               output: join(dir, "x.svg") }),
    ).toThrowError(/axes are/);
  });
});

describe("render fields", () => {
  function gridAndField(dir: string): [string, string] {
    const nx = 6;
    const nz = 4;
    const x: number[] = [];
    const z: number[] = [];
    const v: number[] = [];
    for (let ix = 0; ix < nx; ix++) {
      for (let iz = 0; iz < nz; iz++) {
        x.push(ix * 100);
        z.push(iz * 50);
        v.push(Math.sin(ix) * Math.cos(iz));
      }
    }
    const gridPath = join(dir, "grid.snap");
    writeFileSync(gridPath, Buffer.concat([
      snapshotBuffer("x", 0, nx, nz, x),
      snapshotBuffer("z", 0, nx, nz, z),
    ]));
    const fieldPath = join(dir, "field.snap");
    writeFileSync(fieldPath,
      snapshotBuffer("displacement_z", 12.5, nx, nz, v));
    return [gridPath, fieldPath];
  }

  it("renders snapshots deterministically", () => {
    const dir = workdir();
    const inputs = gridAndField(dir);
    const a = join(dir, "a.svg");
    const b = join(dir, "b.svg");
    render({ kind: "snapshot", inputs, output: a });
    render({ kind: "snapshot", inputs, output: b });
    expect(readFileSync(a).equals(readFileSync(b))).toBe(true);
    expect(readFileSync(a, "utf8")).toContain("displacement_z at t = 12.5 s");
  });

  it("renders ratio maps with the sequential colormap", () => {
    const dir = workdir();
    const inputs = gridAndField(dir);
    const out = join(dir, "r.svg");
    render({ kind: "ratio_map", inputs, output: out });
    expect(readFileSync(out, "utf8")).toContain("|U_r| / |U|");
  });

  it("rejects a field/grid shape mismatch", () => {
    const dir = workdir();
    const [gridPath] = gridAndField(dir);
    const badField = join(dir, "bad.snap");
    writeFileSync(badField, snapshotBuffer("f", 0, 2, 2, [1, 2, 3, 4]));
    expect(() =>
      render({ kind: "snapshot", inputs: [gridPath, badField],
               output: join(dir, "x.svg") }),
    ).toThrowError(/field is 2x2, grid is 6x4/);
  });
});
