/**
 * Deterministic SVG assembly from plain strings.
 *
 * Every coordinate goes through fmt() so repeated renders of the same
 * inputs produce byte-identical files. No timestamps, no generated ids.
 */

export type Attrs = Record<string, string | number>;

export function fmt(v: number): string {
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function el(tag: string, attrs: Attrs = {}, content = ""): string {
  const parts = Object.entries(attrs).map(
    ([k, v]) => `${k}="${typeof v === "number" ? fmt(v) : v}"`,
  );
  const open = parts.length ? `<${tag} ${parts.join(" ")}` : `<${tag}`;
  return content === "" ? `${open}/>` : `${open}>${content}</${tag}>`;
}

export function group(attrs: Attrs, children: string[]): string {
  return el("g", attrs, children.join(""));
}

export function line(
  x1: number,
  y1: number,
  x2: number,
  y2: number,
  attrs: Attrs = {},
): string {
  return el("line", { x1, y1, x2, y2, stroke: "#333333", ...attrs });
}

export function rect(
  x: number,
  y: number,
  width: number,
  height: number,
  attrs: Attrs = {},
): string {
  return el("rect", { x, y, width, height, ...attrs });
}

export function circle(cx: number, cy: number, r: number, attrs: Attrs = {}): string {
  return el("circle", { cx, cy, r, ...attrs });
}

export function polyline(points: Array<[number, number]>, attrs: Attrs = {}): string {
  const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return el("polyline", { points: pts, fill: "none", ...attrs });
}

export function text(x: number, y: number, s: string, attrs: Attrs = {}): string {
  return el(
    "text",
    { x, y, "font-size": 12, fill: "#222222", ...attrs },
    escapeXml(s),
  );
}

export function svgDoc(width: number, height: number, children: string[]): string {
  const body = children.join("\n");
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    rect(0, 0, width, height, { fill: "#ffffff" }),
    body,
    "</svg>",
    "",
  ].join("\n");
}
