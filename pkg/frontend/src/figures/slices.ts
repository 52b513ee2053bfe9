/** Overlaid time slices of a one-dimensional field. */

import { Frame, bottomAxis, frameBox, leftAxis, legend } from "../axes";
import { SERIES_COLORS, linearScale, niceTicks } from "../scale";
import { ParseError } from "../schema";
import { RunData, defaultTimes, levelForTime, timeLabel, timeOfLevel } from "../run";
import { polyline, svgDoc, text } from "../svg";

export interface SlicesOptions {
  field?: "m" | "u";
  times?: number[];
}

export function renderSlices(run: RunData, options: SlicesOptions = {}): string {
  if (run.meta.dim !== 1) {
    throw new ParseError("time slices need a one-dimensional run");
  }
  const field = options.field ?? "m";
  const levels = field === "m" ? run.m : run.u;
  const times = options.times ?? defaultTimes(run.meta);
  if (times.length === 0) throw new ParseError("no times requested");
  const ks = times.map((t) => levelForTime(t, run.meta));

  const nx = run.meta.n_space;
  const h = 1 / nx;
  let lo = Number.POSITIVE_INFINITY;
  let hi = Number.NEGATIVE_INFINITY;
  for (const k of ks) {
    for (const v of levels[k]) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = 0.05 * (hi - lo);
  return buildSlices(run, field, levels, ks, nx, h, lo - pad, hi + pad);
}

function buildSlices(
  run: RunData,
  field: string,
  levels: number[][],
  ks: number[],
  nx: number,
  h: number,
  lo: number,
  hi: number,
): string {
  const f: Frame = { x: 76, y: 40, w: 500, h: 380 };
  const xPos = linearScale(0, 1, f.x, f.x + f.w);
  const yPos = linearScale(lo, hi, f.y + f.h, f.y);
  const lines: string[] = [];
  const entries = ks.map((k, idx) => {
    const color = SERIES_COLORS[idx % SERIES_COLORS.length];
    const pts: Array<[number, number]> = [];
    for (let i = 0; i < nx; i++) pts.push([xPos(i * h), yPos(levels[k][i])]);
    // Close the periodic curve with the wrapped node at x = 1.
    pts.push([xPos(1), yPos(levels[k][0])]);
    lines.push(polyline(pts, { stroke: color, "stroke-width": 1.8 }));
    return {
      label: `t = ${timeLabel(timeOfLevel(k, run.meta))}`,
      color,
      marker: "line" as const,
    };
  });
  const title = `${field}(x) slices  ${run.meta.problem_label}  n=${nx}`;
  return svgDoc(700, 480, [
    text(f.x, 24, title, { "font-size": 14 }),
    frameBox(f),
    ...lines,
    ...bottomAxis(f, xPos, niceTicks(0, 1, 5), "x"),
    ...leftAxis(f, yPos, niceTicks(lo, hi, 6), field),
    ...legend(f.x + f.w + 10, f.y + 12, entries),
  ]);
}
