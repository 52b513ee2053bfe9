import { describe, expect, test } from "vitest";
import { fileURLToPath } from "url";

import { loadRun } from "../src/run";
import { ParseError, parseFields, parseHistory, parseMeta } from "../src/schema";

const fixture = (name: string) =>
  fileURLToPath(new URL(`./fixtures/${name}`, import.meta.url));

const tinyMeta = { dim: 1, n_space: 2, n_time: 1 };

describe("field CSV parsing", () => {
  test("loads a recorded run with consistent shapes", () => {
    const run = loadRun(fixture("t1_sl"));
    expect(run.meta.dim).toBe(1);
    expect(run.m.length).toBe(run.meta.n_time + 1);
    expect(run.m[0].length).toBe(run.meta.n_space);
    expect(run.u.length).toBe(run.m.length);
    expect(run.history.e_m.length).toBe(run.meta.iterations);
    expect(run.history.status).toBe("converged");
  });

  test("missing column is named", () => {
    const text = "k,i,j,x1,value\n0,0,0,0,1\n";
    expect(() => parseFields(text, "f.csv", tinyMeta)).toThrow(/missing column 'x2'/);
  });

  test("non-numeric entry names its column", () => {
    const text = [
      "k,i,j,x1,x2,value",
      "0,0,0,0,0,1",
      "0,1,0,0.5,0,oops",
      "1,0,0,0,0,1",
      "1,1,0,0.5,0,1",
      "",
    ].join("\n");
    expect(() => parseFields(text, "f.csv", tinyMeta)).toThrow(
      /column 'value' has a non-numeric entry 'oops' at data row 2/,
    );
  });

  test("incomplete level is rejected with its count", () => {
    const text = ["k,i,j,x1,x2,value", "0,0,0,0,0,1", "1,0,0,0,0,1", "1,1,0,0.5,0,1", ""].join(
      "\n",
    );
    expect(() => parseFields(text, "f.csv", tinyMeta)).toThrow(
      /level 0 has 1 rows, expected 2/,
    );
  });

  test("node index out of range is rejected", () => {
    const text = ["k,i,j,x1,x2,value", "0,5,0,0,0,1"].join("\n");
    expect(() => parseFields(text, "f.csv", tinyMeta)).toThrow(/column 'i' out of range/);
  });
});

describe("JSON metadata parsing", () => {
  test("missing key is named", () => {
    const meta = { n_space: 4, n_time: 2 };
    expect(() => parseMeta(JSON.stringify(meta), "meta.json")).toThrow(/key 'dim'/);
  });

  test("history length mismatch is rejected", () => {
    const history = { e_u: [1, 0.5], e_m: [1], status: "converged" };
    expect(() => parseHistory(JSON.stringify(history), "history.json")).toThrow(
      ParseError,
    );
  });

  test("invalid JSON is reported with the file label", () => {
    expect(() => parseMeta("{oops", "meta.json")).toThrow(/meta.json: invalid JSON/);
  });
});
