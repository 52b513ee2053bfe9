/** Space-time heatmap of one field of a one-dimensional run. */

import { Frame, bottomAxis, colorBar, frameBox, leftAxis } from "../axes";
import { linearScale, niceTicks, rampColor } from "../scale";
import { ParseError } from "../schema";
import { RunData } from "../run";
import { rect, svgDoc, text } from "../svg";

export interface HeatmapOptions {
  field?: "m" | "u";
}

export function renderHeatmap(run: RunData, options: HeatmapOptions = {}): string {
  const field = options.field ?? "m";
  if (run.meta.dim !== 1) {
    throw new ParseError(
      "space-time heatmap needs a one-dimensional run; use the snapshots kind for two dimensions",
    );
  }
  const levels = field === "m" ? run.m : run.u;
  const nLevels = levels.length;
  const nx = run.meta.n_space;
  let lo = Number.POSITIVE_INFINITY;
  let hi = Number.NEGATIVE_INFINITY;
  for (const level of levels) {
    for (const v of level) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  // A constant field still renders: center it on the ramp.
  const span = hi - lo;
  const shade = (v: number) => (span === 0 ? 0.5 : (v - lo) / span);

  const f: Frame = { x: 64, y: 40, w: 480, h: 380 };
  const width = 700;
  const height = 480;
  const cellW = f.w / nx;
  const cellH = f.h / nLevels;
  const cells: string[] = [];
  for (let k = 0; k < nLevels; k++) {
    const y = f.y + f.h - (k + 1) * cellH;
    for (let i = 0; i < nx; i++) {
      cells.push(
        rect(f.x + i * cellW, y, cellW + 0.35, cellH + 0.35, {
          fill: rampColor(shade(levels[k][i])),
        }),
      );
    }
  }

  const xPos = linearScale(0, 1, f.x, f.x + f.w);
  const tPos = linearScale(0, run.meta.horizon, f.y + f.h, f.y);
  const title = `${field}(x, t)  ${run.meta.problem_label}  n=${nx}`;
  return svgDoc(width, height, [
    text(f.x, 24, title, { "font-size": 14 }),
    ...cells,
    frameBox(f),
    ...bottomAxis(f, xPos, niceTicks(0, 1, 5), "x"),
    ...leftAxis(f, tPos, niceTicks(0, run.meta.horizon, 5), "t"),
    ...colorBar(f.x + f.w + 28, f.y, 16, f.h, lo, hi, "ramp-heatmap"),
  ]);
}
