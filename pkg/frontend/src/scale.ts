/** Linear axis scaling with round tick values. */

export interface Scale {
  domain: [number, number];
  range: [number, number];
  map: (x: number) => number;
  ticks: number[];
}

export function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const span = hi - lo;
  const step0 = span / Math.max(count - 1, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((c) => span / c <= count) ?? candidates[candidates.length - 1];
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  let [d0, d1] = domain;
  if (d0 === d1) {
    // degenerate domain: pad so a single value sits mid-range
    d0 -= 0.5;
    d1 += 0.5;
  }
  const [r0, r1] = range;
  const k = (r1 - r0) / (d1 - d0);
  return {
    domain: [d0, d1],
    range,
    map: (x: number) => r0 + (x - d0) * k,
    ticks: niceTicks(d0, d1),
  };
}

export function padded(lo: number, hi: number, frac = 0.06): [number, number] {
  if (lo === hi) {
    return [lo - 0.5, hi + 0.5];
  }
  const pad = (hi - lo) * frac;
  return [lo - pad, hi + pad];
}
