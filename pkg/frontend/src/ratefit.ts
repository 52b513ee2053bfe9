/**
 * Contraction-rate fit on a Newton error history.
 *
 * Least-squares slope of log(next error) against log(previous error) over
 * consecutive pairs where both entries are positive. This mirrors the
 * solver's own fit, so the annotation on the rate figure agrees with the
 * number the solver reports.
 */

export interface RateLine {
  slope: number;
  /** Intercept in natural-log coordinates: ln(next) = slope*ln(prev) + intercept. */
  intercept: number;
}

export function rateFitLine(errors: number[]): RateLine {
  const xs: number[] = [];
  const ys: number[] = [];
  for (let k = 0; k + 1 < errors.length; k++) {
    const a = errors[k];
    const b = errors[k + 1];
    if (a > 0 && b > 0) {
      xs.push(Math.log(a));
      ys.push(Math.log(b));
    }
  }
  if (xs.length < 2 || errors.length < 3) {
    throw new Error("rate fit needs at least 3 iterations with positive errors");
  }
  const xMean = xs.reduce((s, v) => s + v, 0) / xs.length;
  const yMean = ys.reduce((s, v) => s + v, 0) / ys.length;
  let sxx = 0;
  let sxy = 0;
  for (let k = 0; k < xs.length; k++) {
    sxx += (xs[k] - xMean) * (xs[k] - xMean);
    sxy += (xs[k] - xMean) * (ys[k] - yMean);
  }
  if (sxx === 0) {
    throw new Error("rate fit undefined for a constant error sequence");
  }
  const slope = sxy / sxx;
  return { slope, intercept: yMean - slope * xMean };
}

export function rateFit(errors: number[]): number {
  return rateFitLine(errors).slope;
}
