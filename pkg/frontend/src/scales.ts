/** Linear/log axis scales, tick generation, and a fixed sequential color map. */

export interface Scale {
  (x: number): number;
  domain: [number, number];
  range: [number, number];
  kind: "linear" | "log";
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  const fn = ((x: number) => r0 + ((x - d0) / span) * (r1 - r0)) as Scale;
  fn.domain = [d0, d1];
  fn.range = [r0, r1];
  fn.kind = "linear";
  return fn;
}

export function logScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const l0 = Math.log10(d0);
  const l1 = Math.log10(d1);
  const span = l1 - l0 || 1;
  const fn = ((x: number) => r0 + ((Math.log10(x) - l0) / span) * (r1 - r0)) as Scale;
  fn.domain = [d0, d1];
  fn.range = [r0, r1];
  fn.kind = "log";
  return fn;
}

/** Round-number ticks covering [lo, hi] with roughly n steps. */
export function ticks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / n;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((s) => (hi - lo) / s <= n + 0.5) ?? candidates[4];
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + step * 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : Number(v.toPrecision(12)));
  }
  return out;
}

/** Decade ticks for log axes. */
export function logTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  const first = Math.ceil(Math.log10(lo) - 1e-9);
  const last = Math.floor(Math.log10(hi) + 1e-9);
  for (let e = first; e <= last; e += 1) out.push(Math.pow(10, e));
  if (out.length === 0) out.push(lo, hi);
  return out;
}

const VIRIDIS_STOPS: [number, number, number][] = [
  [68, 1, 84], [71, 24, 106], [72, 40, 120], [69, 55, 129],
  [64, 70, 136], [57, 85, 140], [51, 98, 141], [45, 112, 142],
  [40, 125, 142], [35, 138, 141], [31, 150, 139], [32, 163, 134],
  [41, 175, 127], [60, 187, 117], [86, 198, 103], [116, 208, 85],
  [149, 216, 64], [184, 222, 41], [220, 227, 25], [253, 231, 37],
];

/** Fixed viridis-style map; t in [0, 1]. Deterministic across runs. */
export function colorMap(t: number): string {
  const clamped = Math.min(1, Math.max(0, t));
  const pos = clamped * (VIRIDIS_STOPS.length - 1);
  const i = Math.min(VIRIDIS_STOPS.length - 2, Math.floor(pos));
  const frac = pos - i;
  const mix = (a: number, b: number) => Math.round(a + (b - a) * frac);
  const [r0, g0, b0] = VIRIDIS_STOPS[i];
  const [r1, g1, b1] = VIRIDIS_STOPS[i + 1];
  return `rgb(${mix(r0, r1)},${mix(g0, g1)},${mix(b0, b1)})`;
}

/** Categorical palette for per-series strokes. */
export const SERIES_COLORS = [
  "#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2",
  "#b279a2", "#9d755d", "#eeca3b",
];

export function seriesColor(index: number): string {
  return SERIES_COLORS[index % SERIES_COLORS.length];
}
