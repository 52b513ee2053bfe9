/** Shared panel furniture: frames, axes, legends, color bars. */

import { Scale, rampStops, tickLabel } from "./scale";
import { el, fmt, line, rect, text } from "./svg";

export interface Frame {
  x: number;
  y: number;
  w: number;
  h: number;
}

export type Position = (v: number) => number;

export function frameBox(f: Frame): string {
  return rect(f.x, f.y, f.w, f.h, { fill: "none", stroke: "#333333" });
}

export function bottomAxis(
  f: Frame,
  pos: Position,
  ticks: number[],
  title: string,
  format: (v: number) => string = tickLabel,
): string[] {
  const y0 = f.y + f.h;
  const parts: string[] = [];
  for (const v of ticks) {
    const x = pos(v);
    if (x < f.x - 0.5 || x > f.x + f.w + 0.5) continue;
    parts.push(line(x, y0, x, y0 + 5));
    parts.push(text(x, y0 + 18, format(v), { "text-anchor": "middle", "font-size": 11 }));
  }
  parts.push(
    text(f.x + f.w / 2, y0 + 34, title, { "text-anchor": "middle", "font-size": 12 }),
  );
  return parts;
}

export function leftAxis(
  f: Frame,
  pos: Position,
  ticks: number[],
  title: string,
  format: (v: number) => string = tickLabel,
): string[] {
  const parts: string[] = [];
  for (const v of ticks) {
    const y = pos(v);
    if (y < f.y - 0.5 || y > f.y + f.h + 0.5) continue;
    parts.push(line(f.x - 5, y, f.x, y));
    parts.push(
      text(f.x - 8, y + 4, format(v), { "text-anchor": "end", "font-size": 11 }),
    );
  }
  const cx = f.x - 44;
  const cy = f.y + f.h / 2;
  parts.push(
    text(cx, cy, title, {
      "text-anchor": "middle",
      "font-size": 12,
      transform: `rotate(-90 ${fmt(cx)} ${fmt(cy)})`,
    }),
  );
  return parts;
}

export function gridLines(f: Frame, pos: Position, ticks: number[], vertical: boolean): string[] {
  const parts: string[] = [];
  for (const v of ticks) {
    const p = pos(v);
    if (vertical) {
      if (p < f.x - 0.5 || p > f.x + f.w + 0.5) continue;
      parts.push(line(p, f.y, p, f.y + f.h, { stroke: "#dddddd", "stroke-width": 0.5 }));
    } else {
      if (p < f.y - 0.5 || p > f.y + f.h + 0.5) continue;
      parts.push(line(f.x, p, f.x + f.w, p, { stroke: "#dddddd", "stroke-width": 0.5 }));
    }
  }
  return parts;
}

/**
 * Vertical color bar with min/max labels. The gradient id must be unique
 * within one document and fixed across renders.
 */
export function colorBar(
  x: number,
  y: number,
  w: number,
  h: number,
  lo: number,
  hi: number,
  id: string,
): string[] {
  const stops = rampStops()
    .map(
      (s) =>
        `<stop offset="${fmt(s.offset * 100)}%" stop-color="${s.color}"/>`,
    )
    .join("");
  const defs = `<defs><linearGradient id="${id}" x1="0" y1="1" x2="0" y2="0">${stops}</linearGradient></defs>`;
  return [
    defs,
    rect(x, y, w, h, { fill: `url(#${id})`, stroke: "#333333" }),
    text(x + w + 6, y + h + 4, tickLabel(lo), { "font-size": 11 }),
    text(x + w + 6, y + 8, tickLabel(hi), { "font-size": 11 }),
    text(x + w + 6, y + h / 2 + 4, tickLabel((lo + hi) / 2), { "font-size": 11 }),
  ];
}

export interface LegendEntry {
  label: string;
  color: string;
  marker: "circle" | "square" | "line";
}

export function legend(x: number, y: number, entries: LegendEntry[]): string[] {
  const parts: string[] = [];
  entries.forEach((entry, idx) => {
    const yy = y + idx * 18;
    if (entry.marker === "circle") {
      parts.push(el("circle", { cx: x + 6, cy: yy, r: 4.25, fill: entry.color }));
    } else if (entry.marker === "square") {
      parts.push(rect(x + 2, yy - 4, 8, 8, { fill: entry.color }));
    } else {
      parts.push(line(x, yy, x + 13, yy, { stroke: entry.color, "stroke-width": 2 }));
    }
    parts.push(text(x + 18, yy + 4, entry.label, { "font-size": 11 }));
  });
  return parts;
}
