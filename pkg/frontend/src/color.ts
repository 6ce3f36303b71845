/** Fixed color tables; interpolation in sRGB keeps output deterministic. */

type Rgb = [number, number, number];

// compact viridis-like sequential ramp
const SEQUENTIAL: Rgb[] = [
  [68, 1, 84],
  [59, 82, 139],
  [33, 145, 140],
  [94, 201, 98],
  [253, 231, 37],
];

// blue-white-red diverging ramp for signed fields
const DIVERGING: Rgb[] = [
  [33, 102, 172],
  [146, 197, 222],
  [247, 247, 247],
  [244, 165, 130],
  [178, 24, 43],
];

function lerp(a: number, b: number, t: number): number {
  return a + (b - a) * t;
}

function sample(table: Rgb[], t: number): string {
  const u = Math.min(Math.max(t, 0), 1) * (table.length - 1);
  const i = Math.min(Math.floor(u), table.length - 2);
  const f = u - i;
  const r = Math.round(lerp(table[i][0], table[i + 1][0], f));
  const g = Math.round(lerp(table[i][1], table[i + 1][1], f));
  const b = Math.round(lerp(table[i][2], table[i + 1][2], f));
  return `rgb(${r},${g},${b})`;
}

export function sequential(t: number): string {
  return sample(SEQUENTIAL, t);
}

export function diverging(t: number): string {
  return sample(DIVERGING, t);
}
