/**
 * Log-log scatter of consecutive increments with the fitted power line.
 *
 * The slope annotation is the same least-squares fit the solver reports,
 * printed to three decimals.
 */

import { Frame, bottomAxis, frameBox, gridLines, leftAxis } from "../axes";
import { rateFitLine } from "../ratefit";
import { decadeTicks, linearScale } from "../scale";
import { ParseError } from "../schema";
import { RunData } from "../run";
import { circle, line, svgDoc, text } from "../svg";

export interface RateOptions {
  field?: "m" | "u";
}

export function renderRate(run: RunData, options: RateOptions = {}): string {
  const field = options.field ?? "m";
  const errors = field === "m" ? run.history.e_m : run.history.e_u;
  let fit;
  try {
    fit = rateFitLine(errors);
  } catch (e) {
    throw new ParseError((e as Error).message);
  }
  const pairs: Array<[number, number]> = [];
  for (let k = 0; k + 1 < errors.length; k++) {
    if (errors[k] > 0 && errors[k + 1] > 0) pairs.push([errors[k], errors[k + 1]]);
  }
  const xs = pairs.map((p) => p[0]);
  const ys = pairs.map((p) => p[1]);
  const lo = Math.min(...xs, ...ys);
  const hi = Math.max(...xs, ...ys);

  const f: Frame = { x: 76, y: 40, w: 440, h: 400 };
  const logLo = Math.log10(lo) - 0.3;
  const logHi = Math.log10(hi) + 0.3;
  const xPos = (v: number) => linearScale(logLo, logHi, f.x, f.x + f.w)(Math.log10(v));
  const yPos = (v: number) => linearScale(logLo, logHi, f.y + f.h, f.y)(Math.log10(v));

  // ln(next) = slope*ln(prev) + intercept, drawn across the data span.
  const lineY = (x: number) => Math.exp(fit.slope * Math.log(x) + fit.intercept);
  const x0 = Math.min(...xs);
  const x1 = Math.max(...xs);
  const fitted = line(xPos(x0), yPos(lineY(x0)), xPos(x1), yPos(lineY(x1)), {
    stroke: "#2f8f4e",
    "stroke-width": 1.8,
  });

  const dots = pairs.map(([a, b]) => circle(xPos(a), yPos(b), 4, { fill: "#3366a8" }));
  const ticks = decadeTicks(Math.pow(10, logLo), Math.pow(10, logHi));
  const slopeText = `slope ${fit.slope.toFixed(3)}`;
  const xMid = Math.sqrt(x0 * x1);
  const title = `Increment contraction  ${run.meta.problem_label}  n=${run.meta.n_space}  (${field})`;
  return svgDoc(640, 500, [
    text(f.x, 24, title, { "font-size": 14 }),
    frameBox(f),
    ...gridLines(f, (v: number) => xPos(v), ticks, true),
    ...gridLines(f, (v: number) => yPos(v), ticks, false),
    fitted,
    ...dots,
    text(xPos(xMid) + 10, yPos(lineY(xMid)) - 10, slopeText, {
      "font-size": 13,
      fill: "#2f8f4e",
    }),
    ...bottomAxis(f, (v: number) => xPos(v), ticks, "previous increment"),
    ...leftAxis(f, (v: number) => yPos(v), ticks, "next increment"),
  ]);
}
