/** Run-directory loading and time-to-level mapping. */

import * as fs from "fs";
import * as path from "path";

import {
  ParseError,
  RunHistory,
  RunMeta,
  parseFields,
  parseHistory,
  parseMeta,
} from "./schema";

export interface RunData {
  dir: string;
  meta: RunMeta;
  history: RunHistory;
  u: number[][];
  m: number[][];
}

function readFileChecked(dir: string, name: string): string {
  const p = path.join(dir, name);
  if (!fs.existsSync(p)) {
    throw new ParseError(`${p}: file not found`);
  }
  return fs.readFileSync(p, "utf8");
}

export function loadRun(dir: string): RunData {
  const meta = parseMeta(readFileChecked(dir, "meta.json"), path.join(dir, "meta.json"));
  const history = parseHistory(
    readFileChecked(dir, "history.json"),
    path.join(dir, "history.json"),
  );
  const u = parseFields(
    readFileChecked(dir, "fields_u.csv"),
    path.join(dir, "fields_u.csv"),
    meta,
  );
  const m = parseFields(
    readFileChecked(dir, "fields_m.csv"),
    path.join(dir, "fields_m.csv"),
    meta,
  );
  return { dir, meta, history, u, m };
}

/** Default snapshot instants: start, mid horizon, three quarters, end. */
export function defaultTimes(meta: RunMeta): number[] {
  const T = meta.horizon;
  return [0, 0.5 * T, 0.75 * T, T];
}

export function levelForTime(t: number, meta: RunMeta): number {
  const T = meta.horizon;
  if (!(t >= 0) || t > T * (1 + 1e-12)) {
    throw new ParseError(`time ${t} outside the run horizon [0, ${T}]`);
  }
  return Math.min(meta.n_time, Math.round((t / T) * meta.n_time));
}

/** The exact instant a level sits at, for truthful panel labels. */
export function timeOfLevel(k: number, meta: RunMeta): number {
  return (k / meta.n_time) * meta.horizon;
}

/** Short deterministic label for an instant. */
export function timeLabel(t: number): string {
  if (t === 0) return "0";
  return parseFloat(t.toPrecision(4)).toString();
}
