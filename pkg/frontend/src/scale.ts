/** Linear/log scales and tick helpers for the plot renderers. */

export type Scale = (v: number) => number;

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function logScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const l0 = Math.log10(d0);
  const l1 = Math.log10(d1);
  const span = l1 - l0 || 1;
  return (v) => r0 + ((Math.log10(v) - l0) / span) * (r1 - r0);
}

/** Powers of ten covering [min, max]. */
export function decadeTicks(min: number, max: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(min) - 1e-9); e <= Math.floor(Math.log10(max) + 1e-9); e++) {
    ticks.push(10 ** e);
  }
  return ticks;
}

export function expLabel(v: number): string {
  const e = Math.round(Math.log10(v));
  return `1e${e}`;
}

export function colorbarTicks(min: number, max: number, count = 5): number[] {
  return Array.from({ length: count }, (_, k) => min + (k / (count - 1)) * (max - min));
}
