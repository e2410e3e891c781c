/** Viridis-style colormap, piecewise-linear over anchor stops. */

const STOPS: [number, number, number][] = [
  [68, 1, 84],
  [72, 40, 120],
  [62, 74, 137],
  [49, 104, 142],
  [38, 130, 142],
  [31, 158, 137],
  [53, 183, 121],
  [109, 205, 89],
  [180, 222, 44],
  [253, 231, 37],
];

export function colormap(t: number): string {
  const clamped = Math.max(0, Math.min(1, t));
  const pos = clamped * (STOPS.length - 1);
  const k = Math.min(STOPS.length - 2, Math.floor(pos));
  const frac = pos - k;
  const mix = (a: number, b: number) => Math.round(a + frac * (b - a));
  const [r, g, b] = [0, 1, 2].map((c) => mix(STOPS[k][c], STOPS[k + 1][c]));
  return `rgb(${r},${g},${b})`;
}

/** Normalize a value into [0, 1] for a [min, max] range. */
export function unit(value: number, min: number, max: number): number {
  return max > min ? (value - min) / (max - min) : 0.5;
}
