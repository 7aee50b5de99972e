/**
 * Least-squares decay fit of ln(value) versus N.
 *
 * Mirrors the producer's fit exactly (centered slope formula in double
 * precision) so slope annotations agree with its `fit` output to well below
 * 1e-9.
 */

export interface FitResult {
  slope: number;
  intercept: number;
  rSquared: number;
  points: Array<[number, number]>;
}

export function fitDecay(points: Array<[number, number]>): FitResult {
  if (points.length < 3) {
    throw new Error(`decay fit needs >= 3 points, got ${points.length}`);
  }
  for (const [, v] of points) {
    if (!(v > 0) || !isFinite(v)) {
      throw new Error("decay fit requires strictly positive finite values");
    }
  }
  const x = points.map(([n]) => n);
  const y = points.map(([, v]) => Math.log(v));
  const xMean = x.reduce((a, b) => a + b, 0) / x.length;
  const yMean = y.reduce((a, b) => a + b, 0) / y.length;
  let num = 0;
  let den = 0;
  for (let k = 0; k < x.length; k++) {
    num += (x[k] - xMean) * (y[k] - yMean);
    den += (x[k] - xMean) * (x[k] - xMean);
  }
  const slope = num / den;
  const intercept = yMean - slope * xMean;
  let ssRes = 0;
  let ssTot = 0;
  for (let k = 0; k < x.length; k++) {
    const r = y[k] - (slope * x[k] + intercept);
    ssRes += r * r;
    ssTot += (y[k] - yMean) * (y[k] - yMean);
  }
  return {
    slope,
    intercept,
    rSquared: ssTot === 0 ? 1 : 1 - ssRes / ssTot,
    points,
  };
}
