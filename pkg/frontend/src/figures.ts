/** Figure dispatch: one renderer per kind, all returning an SVG string. */

import { renderHeatmap } from "./figures/heatmap";
import { renderHistory } from "./figures/history";
import { renderRate } from "./figures/rate";
import { renderSlices } from "./figures/slices";
import { renderSnapshots } from "./figures/snapshots";
import { ParseError } from "./schema";
import { RunData } from "./run";

export const KINDS = ["heatmap", "history", "rate", "slices", "snapshots"] as const;
export type Kind = (typeof KINDS)[number];

export interface FigureOptions {
  field?: "m" | "u";
  times?: number[];
}

export function renderFigure(kind: string, run: RunData, options: FigureOptions = {}): string {
  switch (kind) {
    case "heatmap":
      return renderHeatmap(run, options);
    case "history":
      return renderHistory(run);
    case "rate":
      return renderRate(run, options);
    case "slices":
      return renderSlices(run, options);
    case "snapshots":
      return renderSnapshots(run, options);
    default:
      throw new ParseError(`unknown figure kind '${kind}' (expected ${KINDS.join(", ")})`);
  }
}
