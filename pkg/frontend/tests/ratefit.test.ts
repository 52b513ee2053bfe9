import * as fs from "fs";
import { describe, expect, test } from "vitest";
import { fileURLToPath } from "url";

import { rateFit, rateFitLine } from "../src/ratefit";

const fixture = (name: string) =>
  fileURLToPath(new URL(`./fixtures/${name}`, import.meta.url));

describe("rate fit", () => {
  test("exactly quadratic sequence fits slope 2", () => {
    expect(Math.abs(rateFit([1e-1, 1e-2, 1e-4, 1e-8]) - 2)).toBeLessThan(1e-10);
  });

  test("exactly linear sequence fits slope 1", () => {
    expect(Math.abs(rateFit([1e-1, 1e-2, 1e-3, 1e-4]) - 1)).toBeLessThan(1e-10);
  });

  test("matches the solver's fit on a recorded history to 3 decimals", () => {
    // The solver reports 1.1429326815969396 for this run's density
    // increments; the figure annotation must agree at 3 decimals.
    const history = JSON.parse(
      fs.readFileSync(`${fixture("t2a_sl")}/history.json`, "utf8"),
    );
    const slope = rateFit(history.e_m);
    expect(slope.toFixed(3)).toBe("1.143");
    expect(Math.abs(slope - 1.1429326815969396)).toBeLessThan(1e-9);
  });

  test("fitted line passes near the data in log space", () => {
    const errors = [0.5, 0.1, 0.015, 0.002];
    const { slope, intercept } = rateFitLine(errors);
    for (let k = 0; k + 1 < errors.length; k++) {
      const predicted = slope * Math.log(errors[k]) + intercept;
      expect(Math.abs(predicted - Math.log(errors[k + 1]))).toBeLessThan(0.5);
    }
  });

  test("too short or flat sequences are rejected", () => {
    expect(() => rateFit([1e-1, 1e-2])).toThrow(/at least 3 iterations/);
    expect(() => rateFit([0.1, 0.1, 0.1, 0.1])).toThrow(/constant error sequence/);
  });
});
