/** Newton increment history on a log scale, one marker per iteration. */

import { Frame, bottomAxis, frameBox, gridLines, leftAxis, legend } from "../axes";
import { decadeTicks, linearScale, niceTicks } from "../scale";
import { ParseError } from "../schema";
import { RunData } from "../run";
import { circle, polyline, rect, svgDoc, text } from "../svg";

const COLOR_M = "#c23b3b";
const COLOR_U = "#3366a8";

export function renderHistory(run: RunData): string {
  const eU = run.history.e_u;
  const eM = run.history.e_m;
  const n = eM.length;
  if (n === 0) throw new ParseError("history has no iterations to plot");
  const positives = [...eU, ...eM].filter((v) => v > 0);
  if (positives.length === 0) {
    throw new ParseError("history has no positive increments to plot on a log scale");
  }
  let lo = Number.POSITIVE_INFINITY;
  let hi = Number.NEGATIVE_INFINITY;
  for (const v of positives) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo === hi) {
    lo /= 10;
    hi *= 10;
  }

  const f: Frame = { x: 76, y: 40, w: 500, h: 380 };
  const xPos = linearScale(1, Math.max(2, n), f.x + 16, f.x + f.w - 16);
  const yPos = (v: number) =>
    linearScale(Math.log10(lo), Math.log10(hi), f.y + f.h - 12, f.y + 12)(Math.log10(v));

  const series = (values: number[], color: string, marker: "circle" | "square") => {
    const pts: Array<[number, number]> = [];
    const marks: string[] = [];
    values.forEach((v, idx) => {
      if (v <= 0) return;
      const x = xPos(idx + 1);
      const y = yPos(v);
      pts.push([x, y]);
      if (marker === "circle") {
        marks.push(circle(x, y, 3.5, { fill: color }));
      } else {
        marks.push(rect(x - 3.5, y - 3.5, 7, 7, { fill: color }));
      }
    });
    return [polyline(pts, { stroke: color, "stroke-width": 1.5 }), ...marks];
  };

  const iterTicks = niceTicks(1, n, Math.min(8, n)).filter((v) => Number.isInteger(v));
  const yTicks = decadeTicks(lo, hi);
  const title = `Newton increments  ${run.meta.problem_label}  n=${run.meta.n_space}  (${run.history.status})`;
  return svgDoc(700, 480, [
    text(f.x, 24, title, { "font-size": 14 }),
    frameBox(f),
    ...gridLines(f, (v: number) => yPos(v), yTicks, false),
    ...series(eM, COLOR_M, "circle"),
    ...series(eU, COLOR_U, "square"),
    ...bottomAxis(f, xPos, iterTicks.length ? iterTicks : [1, n], "iteration"),
    ...leftAxis(f, (v: number) => yPos(v), yTicks, "sup-norm increment"),
    ...legend(f.x + f.w - 150, f.y + 18, [
      { label: "e_m (density)", color: COLOR_M, marker: "circle" },
      { label: "e_u (value)", color: COLOR_U, marker: "square" },
    ]),
  ]);
}
