/** Axis scales, tick placement, and the fixed color ramps. */

export type Scale = (v: number) => number;

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0;
  const k = span === 0 ? 0 : (r1 - r0) / span;
  return (v: number) => r0 + (v - d0) * k;
}

/** Round tick values at a 1/2/5 step so labels come out short. */
export function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / Math.max(1, count);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const ratio = rawStep / mag;
  const step = mag * (ratio >= 7.5 ? 10 : ratio >= 3.5 ? 5 : ratio >= 1.5 ? 2 : 1);
  const first = Math.ceil(lo / step - 1e-9);
  const last = Math.floor(hi / step + 1e-9);
  const ticks: number[] = [];
  for (let i = first; i <= last; i++) ticks.push(i * step);
  return ticks;
}

/** Powers of ten inside [lo, hi]; both endpoints must be positive. */
export function decadeTicks(lo: number, hi: number): number[] {
  const first = Math.ceil(Math.log10(lo) - 1e-9);
  const last = Math.floor(Math.log10(hi) + 1e-9);
  const ticks: number[] = [];
  for (let e = first; e <= last; e++) ticks.push(Math.pow(10, e));
  if (ticks.length >= 2) return ticks;
  return [lo, hi];
}

export function tickLabel(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    const e = Math.floor(Math.log10(a) + 1e-12);
    const mant = v / Math.pow(10, e);
    const m = parseFloat(mant.toPrecision(6));
    return m === 1 ? `1e${e}` : `${m}e${e}`;
  }
  return parseFloat(v.toPrecision(8)).toString();
}

const RAMP: Array<[number, number, number]> = [
  [68, 1, 84],
  [72, 40, 120],
  [62, 74, 137],
  [49, 104, 142],
  [38, 130, 142],
  [31, 158, 137],
  [53, 183, 121],
  [109, 205, 89],
  [253, 231, 37],
];

function hex2(v: number): string {
  return Math.round(v).toString(16).padStart(2, "0");
}

/** Dark-to-bright perceptual ramp on [0, 1]; input is clamped. */
export function rampColor(t: number): string {
  const s = Math.min(1, Math.max(0, t)) * (RAMP.length - 1);
  const i = Math.min(RAMP.length - 2, Math.floor(s));
  const f = s - i;
  const a = RAMP[i];
  const b = RAMP[i + 1];
  const mix = (c0: number, c1: number) => c0 + (c1 - c0) * f;
  return `#${hex2(mix(a[0], b[0]))}${hex2(mix(a[1], b[1]))}${hex2(mix(a[2], b[2]))}`;
}

export function rampStops(): Array<{ offset: number; color: string }> {
  return RAMP.map((_, i) => ({
    offset: i / (RAMP.length - 1),
    color: rampColor(i / (RAMP.length - 1)),
  }));
}

/** Line colors for categorical series (time slices, histories). */
export const SERIES_COLORS = [
  "#3366a8",
  "#c23b3b",
  "#2f8f4e",
  "#8455b0",
  "#b07d2c",
  "#4aa0b5",
  "#7a7a7a",
  "#c26fa8",
];
