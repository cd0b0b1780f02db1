/**
 * Figure renderers over harness CSV outputs. Each figure reads the CSVs it
 * needs, validates their headers, and emits a deterministic SVG string; no
 * gap, bound, or exponent is ever recomputed here.
 */

import { existsSync } from "fs";
import { join } from "path";

import { FigureInputError, readCsv, col, numCol, uniq, SCHEMAS, Table } from "./csv.js";
import { colorMap, seriesColor } from "./scales.js";
import { Svg, composePanels, makeFrame } from "./svg.js";

export type FigureId = "gap-heatmap" | "ising-bound" | "gap-scaling" | "ipr" | "time-trace";

interface FigureDef {
  inputs: string[];
  optional: string[];
  render: (dir: string) => string;
}

function positiveExtent(values: number[]): [number, number] {
  const positives = values.filter((v) => v > 0 && Number.isFinite(v));
  if (positives.length === 0) throw new FigureInputError("no positive values to plot on a log axis");
  return [Math.min(...positives), Math.max(...positives)];
}

function groupIndex(table: Table, names: string[]): Map<string, number[]> {
  const cols = names.map((n) => col(table, n));
  const out = new Map<string, number[]>();
  table.rows.forEach((_, i) => {
    const key = cols.map((c) => c[i]).join("|");
    const bucket = out.get(key);
    if (bucket) bucket.push(i);
    else out.set(key, [i]);
  });
  return out;
}

// ---------------------------------------------------------------------------
// gap-heatmap: finite-time gap grid, t horizontal, h vertical
// ---------------------------------------------------------------------------

function renderGapHeatmap(dir: string): string {
  const gaps = readCsv(join(dir, "gaps.csv"), SCHEMAS.gaps);
  const tMode = col(gaps, "t_mode");
  const keep = gaps.rows.map((_, i) => i).filter((i) => tMode[i] === "finite");
  if (keep.length === 0) {
    throw new FigureInputError("gap-heatmap needs finite-time rows in gaps.csv");
  }
  const sizes = numCol(gaps, "N");
  const size = Math.max(...keep.map((i) => sizes[i]));
  const hCol = numCol(gaps, "h");
  const tCol = numCol(gaps, "t");
  const dCol = numCol(gaps, "delta");
  const beta = col(gaps, "beta")[keep[0]];

  const cell = new Map<string, number>();
  for (const i of keep) {
    if (sizes[i] !== size) continue;
    const key = `${hCol[i]}|${tCol[i]}`;
    if (!cell.has(key)) cell.set(key, dCol[i]); // first instance represents the cell
  }
  const hs = [...new Set([...cell.keys()].map((k) => Number(k.split("|")[0])))].sort((a, b) => a - b);
  const ts = [...new Set([...cell.keys()].map((k) => Number(k.split("|")[1])))].sort((a, b) => a - b);
  const maxDelta = Math.max(...cell.values());

  const frame = makeFrame({
    title: `Gap of the quench chain, N=${size}, beta=${beta}`,
    xLabel: "evolution time t",
    yLabel: "transverse field h",
    xDomain: [ts[0], ts[ts.length - 1]],
    yDomain: [hs[0], hs[hs.length - 1]],
    width: 640,
  });
  const cellW = (frame.right - frame.left) / ts.length;
  const cellH = (frame.bottom - frame.top) / hs.length;
  hs.forEach((h, row) => {
    ts.forEach((t, colIdx) => {
      const value = cell.get(`${h}|${t}`);
      if (value === undefined) return;
      const attrs: Record<string, string | number> = {
        x: frame.left + colIdx * cellW,
        y: frame.bottom - (row + 1) * cellH,
        width: cellW + 0.5,
        height: cellH + 0.5,
        fill: colorMap(maxDelta > 0 ? value / maxDelta : 0),
      };
      if (value === maxDelta) {
        attrs["data-max-h"] = String(h);
        attrs["data-max-t"] = String(t);
      }
      frame.svg.el("rect", attrs);
    });
  });
  // color bar
  const barX = frame.right + 6;
  for (let i = 0; i < 60; i += 1) {
    frame.svg.rect(barX, frame.bottom - ((i + 1) * (frame.bottom - frame.top)) / 60,
                   8, (frame.bottom - frame.top) / 60 + 0.5, colorMap(i / 59));
  }
  frame.svg.text(barX + 4, frame.top - 6, `max=${maxDelta.toPrecision(3)}`, 9, "middle");
  return frame.svg.render();
}

// ---------------------------------------------------------------------------
// ising-bound: closed-form bound lines with exact-gap scatter
// ---------------------------------------------------------------------------

function renderIsingBound(dir: string): string {
  const bound = readCsv(join(dir, "ising_bound.csv"), SCHEMAS.isingBound);
  const exact = readCsv(join(dir, "ising_exact.csv"), SCHEMAS.gaps);
  const bN = col(bound, "N");
  const bH = numCol(bound, "h");
  const bTotal = numCol(bound, "total");
  const eN = col(exact, "N");
  const eH = numCol(exact, "h");
  const eDelta = numCol(exact, "delta");

  const [lo, hi] = positiveExtent([...bTotal, ...eDelta]);
  const frame = makeFrame({
    title: `Exact gap (points) vs closed-form bound (lines), beta=${col(bound, "beta")[0]}`,
    xLabel: "transverse field h",
    yLabel: "spectral gap bound",
    xDomain: [Math.min(...bH, ...eH), Math.max(...bH, ...eH)],
    yDomain: [lo / 1.5, hi * 1.5],
    yLog: true,
    width: 640,
  });

  const boundSizes = uniq(bN);
  boundSizes.forEach((size, idx) => {
    const points: [number, number][] = bound.rows
      .map((_, i) => i)
      .filter((i) => bN[i] === size && bTotal[i] > 0)
      .sort((a, b) => bH[a] - bH[b])
      .map((i) => [frame.x(bH[i]), frame.y(bTotal[i])]);
    frame.svg.path(points, seriesColor(idx), 1.6);
    if (points.length > 0) {
      frame.svg.text(points[points.length - 1][0] - 2, points[points.length - 1][1] - 4,
                     `N=${size}`, 9, "end", { fill: seriesColor(idx) });
    }
  });
  uniq(eN).forEach((size) => {
    const idx = boundSizes.indexOf(size);
    const color = seriesColor(idx >= 0 ? idx : boundSizes.length);
    exact.rows.forEach((_, i) => {
      if (eN[i] === size && eDelta[i] > 0) {
        frame.svg.circle(frame.x(eH[i]), frame.y(eDelta[i]), 2.4, color);
      }
    });
  });
  return frame.svg.render();
}

// ---------------------------------------------------------------------------
// gap-scaling: mean-gap-vs-N fits plus the exponent curve
// ---------------------------------------------------------------------------

function pickDisplayedFields(hs: number[], ks: number[]): number[] {
  if (hs.length <= 4) return hs;
  const best = hs[ks.indexOf(Math.min(...ks))];
  const picks = new Set<number>([best, hs[0], hs[hs.length - 1]]);
  return [...picks].sort((a, b) => a - b);
}

function renderGapScaling(dir: string): string {
  const means = readCsv(join(dir, "gap_means.csv"), SCHEMAS.gapMeans);
  const fits = readCsv(join(dir, "gap_fits.csv"), SCHEMAS.gapFits);
  const baselinePath = join(dir, "baseline_fits.csv");
  const baselines = existsSync(baselinePath)
    ? readCsv(baselinePath, SCHEMAS.baselineFits)
    : null;

  const fitH = numCol(fits, "h");
  const fitK = numCol(fits, "k");
  const fitPrefactor = numCol(fits, "prefactor_log2");
  const displayed = pickDisplayedFields(fitH, fitK);

  const mH = numCol(means, "h");
  const mN = numCol(means, "N");
  const mDelta = numCol(means, "mean_delta");

  // Panel A: mean gap vs N on a log axis with the fitted lines.
  const sizes = [...new Set(mN)].sort((a, b) => a - b);
  const shownIdx = means.rows.map((_, i) => i).filter((i) => displayed.includes(mH[i]));
  const [gLo, gHi] = positiveExtent(shownIdx.map((i) => mDelta[i]));
  const panelA = makeFrame({
    title: "mean gap vs system size",
    xLabel: "spins N",
    yLabel: "mean spectral gap",
    xDomain: [sizes[0] - 0.3, sizes[sizes.length - 1] + 0.3],
    yDomain: [gLo / 2, gHi * 2],
    yLog: true,
    width: 500,
    height: 430,
  });
  displayed.forEach((h, idx) => {
    const color = seriesColor(idx);
    shownIdx.filter((i) => mH[i] === h).forEach((i) => {
      panelA.svg.circle(panelA.x(mN[i]), panelA.y(mDelta[i]), 2.6, color);
    });
    const fitRow = fitH.indexOf(h);
    if (fitRow >= 0) {
      const k = fitK[fitRow];
      const prefactor = fitPrefactor[fitRow];
      const line: [number, number][] = sizes.map((n) => [
        panelA.x(n),
        panelA.y(Math.pow(2, prefactor - k * n)),
      ]);
      panelA.svg.path(line, color, 1.3, "4 2");
      panelA.svg.text(
        panelA.right - 4,
        panelA.top + 14 + 13 * idx,
        `h=${h}: k = ${k.toFixed(9)}`,
        10,
        "end",
        { fill: color, "data-h": String(h), "data-k": k.toFixed(12) },
      );
    }
  });

  // Panel B: exponent curve with classical reference lines.
  const curveIdx = fits.rows.map((_, i) => i).sort((a, b) => fitH[a] - fitH[b]);
  const kValues = curveIdx.map((i) => fitK[i]);
  let kLo = Math.min(...kValues);
  let kHi = Math.max(...kValues);
  const refs: { label: string; k: number; dash: string; color: string }[] = [];
  if (baselines) {
    const strategy = col(baselines, "strategy");
    const bk = numCol(baselines, "k");
    baselines.rows.forEach((_, i) => {
      if (strategy[i] === "uniform") {
        refs.push({ label: "uniform", k: bk[i], dash: "", color: "#d62728" });
      }
      if (strategy[i] === "local_times_n") {
        refs.push({ label: "N x local", k: bk[i], dash: "6 3", color: "#333333" });
      }
    });
    refs.forEach((ref) => {
      kLo = Math.min(kLo, ref.k);
      kHi = Math.max(kHi, ref.k);
    });
  }
  const pad = 0.1 * (kHi - kLo || 1);
  const panelB = makeFrame({
    title: "scaling exponent k(h)",
    xLabel: "transverse field h",
    yLabel: "k  (gap ~ 2^{-kN})",
    xDomain: [Math.min(...fitH), Math.max(...fitH)],
    yDomain: [kLo - pad, kHi + pad],
    width: 460,
    height: 430,
  });
  panelB.svg.path(
    curveIdx.map((i) => [panelB.x(fitH[i]), panelB.y(fitK[i])]),
    seriesColor(0),
    1.6,
  );
  refs.forEach((ref) => {
    panelB.svg.line(panelB.left, panelB.y(ref.k), panelB.right, panelB.y(ref.k),
                    ref.color, 1.2, ref.dash);
    panelB.svg.text(panelB.right - 4, panelB.y(ref.k) - 4, ref.label, 9, "end",
                    { fill: ref.color });
  });
  return composePanels(980, 430, [
    { svg: panelA.svg, dx: 0 },
    { svg: panelB.svg, dx: 520 },
  ]);
}

// ---------------------------------------------------------------------------
// ipr: per-configuration scatter plus the window-average exponent curve
// ---------------------------------------------------------------------------

function renderIpr(dir: string): string {
  const exponents = readCsv(join(dir, "ipr_exponents.csv"), SCHEMAS.iprExponents);
  const vectorsPath = join(dir, "ipr_vectors.csv");
  const vectors = existsSync(vectorsPath) ? readCsv(vectorsPath, SCHEMAS.iprVectors) : null;

  const width = vectors ? 980 : 520;
  const panels: { svg: Svg; dx: number }[] = [];

  if (vectors) {
    const vH = numCol(vectors, "h");
    const vEnergy = numCol(vectors, "energy");
    const vIpr = numCol(vectors, "ipr");
    const hs = [...new Set(vH)].sort((a, b) => a - b);
    const shown = hs.length <= 3 ? hs : [hs[0], hs[Math.floor(hs.length / 2)], hs[hs.length - 1]];
    const [iLo, iHi] = positiveExtent(vIpr);
    const frame = makeFrame({
      title: `IPR by configuration energy (N=${col(vectors, "N")[0]})`,
      xLabel: "classical energy",
      yLabel: "IPR",
      xDomain: [Math.min(...vEnergy), Math.max(...vEnergy)],
      yDomain: [iLo / 1.5, Math.max(1, iHi) * 1.2],
      yLog: true,
      width: 500,
      height: 430,
    });
    shown.forEach((h, idx) => {
      vectors.rows.forEach((_, i) => {
        if (vH[i] === h) {
          frame.svg.circle(frame.x(vEnergy[i]), frame.y(vIpr[i]), 1.6, seriesColor(idx));
        }
      });
      frame.svg.text(frame.right - 4, frame.top + 14 + 13 * idx, `h=${h}`, 10, "end",
                     { fill: seriesColor(idx) });
    });
    panels.push({ svg: frame.svg, dx: 0 });
  }

  const eH = numCol(exponents, "h");
  const eK = numCol(exponents, "k");
  const order = exponents.rows.map((_, i) => i).sort((a, b) => eH[a] - eH[b]);
  const frameK = makeFrame({
    title: "window-average IPR exponent",
    xLabel: "transverse field h",
    yLabel: "k  (IPR ~ 2^{-kN})",
    xDomain: [Math.min(...eH), Math.max(...eH)],
    yDomain: [Math.min(...eK) - 0.05, Math.max(...eK) + 0.05],
    width: vectors ? 460 : 500,
    height: 430,
  });
  frameK.svg.path(order.map((i) => [frameK.x(eH[i]), frameK.y(eK[i])]), seriesColor(1), 1.6);
  panels.push({ svg: frameK.svg, dx: vectors ? 520 : 0 });
  return composePanels(width, 430, panels);
}

// ---------------------------------------------------------------------------
// time-trace: gap vs evolution time at the extremal fields
// ---------------------------------------------------------------------------

function renderTimeTrace(dir: string): string {
  const trace = readCsv(join(dir, "time_trace.csv"), SCHEMAS.timeTrace);
  const tN = col(trace, "N");
  const tRole = col(trace, "h_role");
  const tT = numCol(trace, "t");
  const tDelta = numCol(trace, "mean_delta");
  const tLong = numCol(trace, "long_time_mean");
  const tH = numCol(trace, "h");

  const frame = makeFrame({
    title: "instance-averaged gap vs evolution time",
    xLabel: "evolution time t",
    yLabel: "mean spectral gap",
    xDomain: [Math.min(...tT), Math.max(...tT)],
    yDomain: [0, Math.max(...tDelta, ...tLong) * 1.15],
    width: 640,
  });

  let legendRow = 0;
  for (const [key, rows] of groupIndex(trace, ["N", "h_role"])) {
    const [size, role] = key.split("|");
    const idx = uniq(tN).indexOf(size);
    const base = seriesColor(idx);
    const stroke = role === "max" ? base : base + "80"; // lighter for the minimal field
    const ordered = rows.sort((a, b) => tT[a] - tT[b]);
    frame.svg.path(ordered.map((i) => [frame.x(tT[i]), frame.y(tDelta[i])]), stroke, 1.5);
    frame.svg.line(frame.left, frame.y(tLong[ordered[0]]), frame.right,
                   frame.y(tLong[ordered[0]]), stroke, 0.8, "5 3");
    frame.svg.text(frame.right - 4, frame.top + 14 + 13 * legendRow,
                   `N=${size} h_${role}=${tH[ordered[0]]}`, 9, "end", { fill: stroke });
    legendRow += 1;
  }
  return frame.svg.render();
}

// ---------------------------------------------------------------------------

export const FIGURES: Record<FigureId, FigureDef> = {
  "gap-heatmap": { inputs: ["gaps.csv"], optional: [], render: renderGapHeatmap },
  "ising-bound": {
    inputs: ["ising_bound.csv", "ising_exact.csv"],
    optional: [],
    render: renderIsingBound,
  },
  "gap-scaling": {
    inputs: ["gap_means.csv", "gap_fits.csv"],
    optional: ["baseline_fits.csv"],
    render: renderGapScaling,
  },
  ipr: { inputs: ["ipr_exponents.csv"], optional: ["ipr_vectors.csv"], render: renderIpr },
  "time-trace": { inputs: ["time_trace.csv"], optional: [], render: renderTimeTrace },
};

export function availableFigures(dir: string): FigureId[] {
  return (Object.keys(FIGURES) as FigureId[]).filter((id) =>
    FIGURES[id].inputs.every((file) => existsSync(join(dir, file))),
  );
}

export function renderFigure(id: FigureId, dir: string): string {
  const def = FIGURES[id];
  if (!def) throw new FigureInputError(`unknown figure id: ${id}`);
  return def.render(dir);
}
