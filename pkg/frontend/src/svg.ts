/**
 * Minimal deterministic SVG assembly: fixed canvas size, numeric attributes
 * trimmed to stable short strings, no timestamps or environment lookups, so
 * identical inputs produce identical bytes.
 */

import { Scale, linearScale, logScale, ticks, logTicks } from "./scales.js";

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return "0";
  const rounded = Math.round(x * 100) / 100;
  return Object.is(rounded, -0) ? "0" : String(rounded);
}

export function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export class Svg {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
      `<rect width="${width}" height="${height}" fill="white"/>`,
    );
  }

  el(tag: string, attrs: Record<string, string | number>, text?: string): void {
    const rendered = Object.entries(attrs)
      .map(([key, value]) => `${key}="${typeof value === "number" ? fmt(value) : value}"`)
      .join(" ");
    if (text === undefined) {
      this.parts.push(`<${tag} ${rendered}/>`);
    } else {
      this.parts.push(`<${tag} ${rendered}>${esc(text)}</${tag}>`);
    }
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1, dash = ""): void {
    const attrs: Record<string, string | number> = {
      x1, y1, x2, y2, stroke, "stroke-width": width,
    };
    if (dash) attrs["stroke-dasharray"] = dash;
    this.el("line", attrs);
  }

  path(points: [number, number][], stroke: string, width = 1.5, dash = ""): void {
    if (points.length === 0) return;
    const d = points
      .map(([x, y], i) => `${i === 0 ? "M" : "L"}${fmt(x)} ${fmt(y)}`)
      .join(" ");
    const attrs: Record<string, string | number> = {
      d, fill: "none", stroke, "stroke-width": width,
    };
    if (dash) attrs["stroke-dasharray"] = dash;
    this.el("path", attrs);
  }

  circle(cx: number, cy: number, r: number, fill: string): void {
    this.el("circle", { cx, cy, r, fill });
  }

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.el("rect", { x, y, width: w, height: h, fill });
  }

  text(x: number, y: number, content: string, size = 11, anchor = "start",
       extra: Record<string, string | number> = {}): void {
    this.el("text", { x, y, "font-size": size, "text-anchor": anchor, ...extra }, content);
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }

  /** Inner elements only (no <svg> wrapper or background), for composition. */
  body(): string {
    return this.parts.slice(2).join("\n");
  }
}

/** Place rendered panels side by side on one canvas. */
export function composePanels(
  width: number,
  height: number,
  panels: { svg: Svg; dx: number }[],
): string {
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
  ];
  for (const { svg, dx } of panels) {
    parts.push(dx === 0 ? svg.body() : `<g transform="translate(${fmt(dx)} 0)">\n${svg.body()}\n</g>`);
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

export interface Frame {
  svg: Svg;
  x: Scale;
  y: Scale;
  left: number;
  top: number;
  right: number;
  bottom: number;
}

export interface FrameOptions {
  width?: number;
  height?: number;
  title: string;
  xLabel: string;
  yLabel: string;
  xDomain: [number, number];
  yDomain: [number, number];
  yLog?: boolean;
  left?: number;
  top?: number;
}

function tickLabel(value: number): string {
  if (value !== 0 && (Math.abs(value) < 1e-3 || Math.abs(value) >= 1e4)) {
    return value.toExponential(0).replace("+", "");
  }
  return String(Number(value.toPrecision(6)));
}

/** Axes, ticks, labels, and title around a plotting region. */
export function makeFrame(options: FrameOptions): Frame {
  const width = options.width ?? 560;
  const height = options.height ?? 400;
  const left = options.left ?? 64;
  const top = options.top ?? 34;
  const right = width - 18;
  const bottom = height - 46;
  const svg = new Svg(width, height);
  const x = linearScale(options.xDomain[0], options.xDomain[1], left, right);
  const y = options.yLog
    ? logScale(options.yDomain[0], options.yDomain[1], bottom, top)
    : linearScale(options.yDomain[0], options.yDomain[1], bottom, top);

  svg.text(width / 2, 18, options.title, 13, "middle", { "font-weight": "bold" });
  svg.line(left, bottom, right, bottom, "#222");
  svg.line(left, top, left, bottom, "#222");

  for (const tick of ticks(options.xDomain[0], options.xDomain[1], 6)) {
    const px = x(tick);
    svg.line(px, bottom, px, bottom + 4, "#222");
    svg.text(px, bottom + 16, tickLabel(tick), 10, "middle");
  }
  const yTicks = options.yLog
    ? logTicks(options.yDomain[0], options.yDomain[1])
    : ticks(options.yDomain[0], options.yDomain[1], 6);
  for (const tick of yTicks) {
    const py = y(tick);
    svg.line(left - 4, py, left, py, "#222");
    svg.text(left - 7, py + 3, tickLabel(tick), 10, "end");
  }
  svg.text(width / 2, height - 12, options.xLabel, 11, "middle");
  svg.text(14, (top + bottom) / 2, options.yLabel, 11, "middle",
           { transform: `rotate(-90 14 ${fmt((top + bottom) / 2)})` });
  return { svg, x, y, left, top, right, bottom };
}
