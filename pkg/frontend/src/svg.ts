/** Minimal deterministic SVG scene builder (no DOM, no randomness). */
import { fmt, linearScale, Scale, ticks } from "./scale.js";

export const WIDTH = 960;
export const HEIGHT = 540;
export const MARGIN = { left: 70, right: 90, top: 40, bottom: 50 };

export class Svg {
  private parts: string[] = [];

  constructor(width = WIDTH, height = HEIGHT) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
        `height="${height}" viewBox="0 0 ${width} ${height}" ` +
        `font-family="Helvetica,Arial,sans-serif">`,
      `<rect width="${width}" height="${height}" fill="white"/>`,
    );
  }

  raw(s: string): void {
    this.parts.push(s);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, w = 1): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${stroke}" stroke-width="${w}"/>`,
    );
  }

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ` +
        `fill="${fill}"/>`,
    );
  }

  path(points: Array<[number, number]>, stroke: string, w = 1.2): void {
    if (points.length === 0) return;
    const d = points
      .map(([x, y], i) => `${i === 0 ? "M" : "L"}${fmt(x)} ${fmt(y)}`)
      .join("");
    this.parts.push(
      `<path d="${d}" fill="none" stroke="${stroke}" stroke-width="${w}"/>`,
    );
  }

  text(x: number, y: number, content: string, opts: {
    size?: number; anchor?: string; rotate?: number; fill?: string;
  } = {}): void {
    const { size = 12, anchor = "middle", rotate, fill = "#222" } = opts;
    const transform = rotate !== undefined
      ? ` transform="rotate(${rotate} ${fmt(x)} ${fmt(y)})"`
      : "";
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" ` +
        `text-anchor="${anchor}" fill="${fill}"${transform}>` +
        `${escapeXml(content)}</text>`,
    );
  }

  toString(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export interface Frame {
  x: Scale;
  y: Scale;
}

/** Axes, tick marks and labels around the plotting frame. */
export function drawFrame(
  svg: Svg,
  xDomain: [number, number],
  yDomain: [number, number],
  labels: { x: string; y: string; title?: string },
  region = {
    left: MARGIN.left,
    right: WIDTH - MARGIN.right,
    top: MARGIN.top,
    bottom: HEIGHT - MARGIN.bottom,
  },
): Frame {
  const x = linearScale(xDomain, [region.left, region.right]);
  const y = linearScale(yDomain, [region.bottom, region.top]);
  svg.line(region.left, region.bottom, region.right, region.bottom, "#222");
  svg.line(region.left, region.bottom, region.left, region.top, "#222");
  for (const t of ticks(xDomain[0], xDomain[1])) {
    const px = x.map(t);
    svg.line(px, region.bottom, px, region.bottom + 5, "#222");
    svg.text(px, region.bottom + 18, fmt(t, 4));
  }
  for (const t of ticks(yDomain[0], yDomain[1])) {
    const py = y.map(t);
    svg.line(region.left - 5, py, region.left, py, "#222");
    svg.text(region.left - 8, py + 4, fmt(t, 4), { anchor: "end" });
  }
  svg.text((region.left + region.right) / 2, HEIGHT - 12, labels.x);
  svg.text(18, (region.top + region.bottom) / 2, labels.y, { rotate: -90 });
  if (labels.title) {
    svg.text((region.left + region.right) / 2, 22, labels.title, { size: 14 });
  }
  return { x, y };
}

/** Vertical colorbar on the right margin. */
export function drawColorbar(
  svg: Svg,
  colormap: (t: number) => string,
  domain: [number, number],
  label: string,
): void {
  const x0 = WIDTH - MARGIN.right + 24;
  const top = MARGIN.top;
  const bottom = HEIGHT - MARGIN.bottom;
  const n = 64;
  const h = (bottom - top) / n;
  for (let i = 0; i < n; i++) {
    const t = 1 - i / (n - 1);
    svg.rect(x0, top + i * h, 14, h + 0.5, colormap(t));
  }
  svg.text(x0 + 7, top - 8, fmt(domain[1], 3), { size: 10 });
  svg.text(x0 + 7, bottom + 14, fmt(domain[0], 3), { size: 10 });
  svg.text(x0 + 40, (top + bottom) / 2, label, { rotate: -90, size: 11 });
}
