/**
 * Density snapshots at selected instants, two panels per row.
 *
 * Two-dimensional runs draw node tiles with one shared color scale;
 * one-dimensional runs draw a line per panel with one shared y range.
 */

import { Frame, bottomAxis, colorBar, frameBox, leftAxis } from "../axes";
import { linearScale, niceTicks, rampColor } from "../scale";
import { ParseError } from "../schema";
import { RunData, defaultTimes, levelForTime, timeLabel, timeOfLevel } from "../run";
import { polyline, rect, svgDoc, text } from "../svg";

export interface SnapshotsOptions {
  field?: "m" | "u";
  times?: number[];
}

const PANEL_W = 240;
const PANEL_H = 200;
const GAP_X = 84;
const GAP_Y = 72;
const MARGIN_X = 70;
const MARGIN_Y = 48;

export function renderSnapshots(run: RunData, options: SnapshotsOptions = {}): string {
  const field = options.field ?? "m";
  const levels = field === "m" ? run.m : run.u;
  const times = options.times ?? defaultTimes(run.meta);
  if (times.length === 0) throw new ParseError("no times requested");
  const ks = times.map((t) => levelForTime(t, run.meta));

  let lo = Number.POSITIVE_INFINITY;
  let hi = Number.NEGATIVE_INFINITY;
  for (const k of ks) {
    for (const v of levels[k]) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  const cols = Math.min(2, ks.length);
  const rows = Math.ceil(ks.length / cols);
  const width = MARGIN_X + cols * (PANEL_W + GAP_X) + 40;
  const height = MARGIN_Y + rows * (PANEL_H + GAP_Y);

  const panels: string[] = [];
  ks.forEach((k, idx) => {
    const f: Frame = {
      x: MARGIN_X + (idx % cols) * (PANEL_W + GAP_X),
      y: MARGIN_Y + Math.floor(idx / cols) * (PANEL_H + GAP_Y),
      w: PANEL_W,
      h: PANEL_H,
    };
    const label = `t = ${timeLabel(timeOfLevel(k, run.meta))}`;
    panels.push(text(f.x, f.y - 8, label, { "font-size": 13 }));
    if (run.meta.dim === 2) {
      panels.push(...tilePanel(f, levels[k], run.meta.n_space, lo, hi));
    } else {
      panels.push(...linePanel(f, levels[k], run.meta.n_space, lo, hi, field));
    }
  });
  if (run.meta.dim === 2) {
    panels.push(
      ...colorBar(width - 52, MARGIN_Y, 14, PANEL_H, lo, hi, "ramp-snapshots"),
    );
  }
  const title = `${field} snapshots  ${run.meta.problem_label}  n=${run.meta.n_space}`;
  return svgDoc(width, height, [text(MARGIN_X, 22, title, { "font-size": 14 }), ...panels]);
}

function tilePanel(f: Frame, level: number[], n: number, lo: number, hi: number): string[] {
  const span = hi - lo;
  const shade = (v: number) => (span === 0 ? 0.5 : (v - lo) / span);
  const cw = f.w / n;
  const ch = f.h / n;
  const tiles: string[] = [];
  for (let j = 0; j < n; j++) {
    const y = f.y + f.h - (j + 1) * ch;
    for (let i = 0; i < n; i++) {
      tiles.push(
        rect(f.x + i * cw, y, cw + 0.35, ch + 0.35, {
          fill: rampColor(shade(level[i + j * n])),
        }),
      );
    }
  }
  const xPos = linearScale(0, 1, f.x, f.x + f.w);
  const yPos = linearScale(0, 1, f.y + f.h, f.y);
  return [
    ...tiles,
    frameBox(f),
    ...bottomAxis(f, xPos, niceTicks(0, 1, 3), "x1"),
    ...leftAxis(f, yPos, niceTicks(0, 1, 3), "x2"),
  ];
}

function linePanel(
  f: Frame,
  level: number[],
  n: number,
  lo: number,
  hi: number,
  field: string,
): string[] {
  let bottom = lo;
  let top = hi;
  if (bottom === top) {
    bottom -= 0.5;
    top += 0.5;
  }
  const pad = 0.05 * (top - bottom);
  bottom -= pad;
  top += pad;
  const xPos = linearScale(0, 1, f.x, f.x + f.w);
  const yPos = linearScale(bottom, top, f.y + f.h, f.y);
  const h = 1 / n;
  const pts: Array<[number, number]> = [];
  for (let i = 0; i < n; i++) pts.push([xPos(i * h), yPos(level[i])]);
  pts.push([xPos(1), yPos(level[0])]);
  return [
    frameBox(f),
    polyline(pts, { stroke: "#3366a8", "stroke-width": 1.8 }),
    ...bottomAxis(f, xPos, niceTicks(0, 1, 3), "x"),
    ...leftAxis(f, yPos, niceTicks(bottom, top, 4), field),
  ];
}
