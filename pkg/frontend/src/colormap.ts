/** Dark-blue to yellow colormap over the fixed [0, 20] value range,
 * interpolated through teal/green like the familiar viridis-style ramps. */

const STOPS: Array<[number, [number, number, number]]> = [
  [0.0, [13, 8, 84]], // dark blue
  [0.25, [56, 89, 140]],
  [0.5, [33, 144, 140]], // teal
  [0.75, [94, 201, 98]], // green
  [1.0, [253, 231, 37]], // yellow
];

export function colorFor(value: number, lo = 0, hi = 20): string {
  const t = Math.min(1, Math.max(0, (value - lo) / (hi - lo)));
  let i = 0;
  while (i < STOPS.length - 2 && t > STOPS[i + 1][0]) i++;
  const [t0, c0] = STOPS[i];
  const [t1, c1] = STOPS[i + 1];
  const f = t1 === t0 ? 0 : (t - t0) / (t1 - t0);
  const rgb = c0.map((a, k) => Math.round(a + f * (c1[k] - a)));
  return `rgb(${rgb[0]}, ${rgb[1]}, ${rgb[2]})`;
}

export const OVERLAY_COLOR = "#000000";
