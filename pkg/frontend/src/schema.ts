/**
 * Parsers for the solver's run artifacts.
 *
 * Field CSVs carry the exact header k,i,j,x1,x2,value in level-major
 * order; meta.json and history.json are validated against schemas that
 * require the keys the figures depend on and pass the rest through.
 * Every failure is raised as a ParseError naming the offending column
 * or key.
 */

import Papa from "papaparse";
import { z } from "zod";

export class ParseError extends Error {}

export const FIELD_COLUMNS = ["k", "i", "j", "x1", "x2", "value"] as const;

const metaSchema = z
  .object({
    dim: z.number().int(),
    n_space: z.number().int().positive(),
    n_time: z.number().int().positive(),
    h: z.number().positive(),
    dt: z.number().positive(),
    horizon: z.number().positive(),
    nu: z.number(),
    problem_label: z.string(),
    status: z.string(),
    iterations: z.number().int(),
  })
  .passthrough();

const historySchema = z
  .object({
    e_u: z.array(z.number()),
    e_m: z.array(z.number()),
    status: z.string(),
    alpha: z.array(z.number()).optional(),
    theta: z.array(z.number()).optional(),
  })
  .passthrough();

export type RunMeta = z.infer<typeof metaSchema>;
export type RunHistory = z.infer<typeof historySchema>;

function firstIssue(label: string, error: z.ZodError): ParseError {
  const issue = error.issues[0];
  const path = issue.path.length ? issue.path.join(".") : "(root)";
  return new ParseError(`${label}: key '${path}': ${issue.message}`);
}

export function parseMeta(jsonText: string, label: string): RunMeta {
  let raw: unknown;
  try {
    raw = JSON.parse(jsonText);
  } catch (e) {
    throw new ParseError(`${label}: invalid JSON (${(e as Error).message})`);
  }
  const result = metaSchema.safeParse(raw);
  if (!result.success) throw firstIssue(label, result.error);
  return result.data;
}

export function parseHistory(jsonText: string, label: string): RunHistory {
  let raw: unknown;
  try {
    raw = JSON.parse(jsonText);
  } catch (e) {
    throw new ParseError(`${label}: invalid JSON (${(e as Error).message})`);
  }
  const result = historySchema.safeParse(raw);
  if (!result.success) throw firstIssue(label, result.error);
  if (result.data.e_u.length !== result.data.e_m.length) {
    throw new ParseError(`${label}: key 'e_u': length differs from 'e_m'`);
  }
  return result.data;
}

/**
 * Parse one fields CSV into per-level node arrays, shape
 * (n_time+1) x n_nodes with nodes flattened as i + j*n_space.
 */
export function parseFields(
  csvText: string,
  label: string,
  meta: Pick<RunMeta, "dim" | "n_space" | "n_time">,
): number[][] {
  const parsed = Papa.parse<string[]>(csvText.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new ParseError(`${label}: ${parsed.errors[0].message}`);
  }
  const rows = parsed.data;
  if (rows.length === 0) throw new ParseError(`${label}: empty file`);
  const header = rows[0];
  for (const col of FIELD_COLUMNS) {
    if (!header.includes(col)) {
      throw new ParseError(`${label}: missing column '${col}'`);
    }
  }
  if (
    header.length !== FIELD_COLUMNS.length ||
    FIELD_COLUMNS.some((col, idx) => header[idx] !== col)
  ) {
    throw new ParseError(
      `${label}: header must be '${FIELD_COLUMNS.join(",")}', got '${header.join(",")}'`,
    );
  }
  const nSpace = meta.n_space;
  const nNodes = meta.dim === 2 ? nSpace * nSpace : nSpace;
  const nLevels = meta.n_time + 1;
  const levels: number[][] = Array.from({ length: nLevels }, () =>
    new Array<number>(nNodes).fill(Number.NaN),
  );
  const counts = new Array<number>(nLevels).fill(0);
  for (let r = 1; r < rows.length; r++) {
    const row = rows[r];
    if (row.length !== FIELD_COLUMNS.length) {
      throw new ParseError(
        `${label}: data row ${r} has ${row.length} fields, expected ${FIELD_COLUMNS.length}`,
      );
    }
    const nums = new Array<number>(row.length);
    for (let c = 0; c < row.length; c++) {
      const v = Number(row[c]);
      if (row[c].trim() === "" || Number.isNaN(v)) {
        throw new ParseError(
          `${label}: column '${FIELD_COLUMNS[c]}' has a non-numeric entry '${row[c]}' at data row ${r}`,
        );
      }
      nums[c] = v;
    }
    const [k, i, j] = nums;
    if (!Number.isInteger(k) || k < 0 || k >= nLevels) {
      throw new ParseError(`${label}: column 'k' out of range at data row ${r} (got ${row[0]})`);
    }
    if (!Number.isInteger(i) || i < 0 || i >= nSpace) {
      throw new ParseError(`${label}: column 'i' out of range at data row ${r} (got ${row[1]})`);
    }
    const jMax = meta.dim === 2 ? nSpace : 1;
    if (!Number.isInteger(j) || j < 0 || j >= jMax) {
      throw new ParseError(`${label}: column 'j' out of range at data row ${r} (got ${row[2]})`);
    }
    levels[k][i + j * nSpace] = nums[5];
    counts[k] += 1;
  }
  for (let k = 0; k < nLevels; k++) {
    if (counts[k] !== nNodes) {
      throw new ParseError(`${label}: level ${k} has ${counts[k]} rows, expected ${nNodes}`);
    }
  }
  return levels;
}
