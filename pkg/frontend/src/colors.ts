// Force coloring: a diverging scale symmetric about zero so tension and
// compression are distinguishable at a glance regardless of magnitude.

export type Rgb = [number, number, number];

export const TENSION_HUE: Rgb = [0.91, 0.28, 0.14];      // warm
export const COMPRESSION_HUE: Rgb = [0.13, 0.42, 0.95];  // cool
export const NEUTRAL: Rgb = [0.62, 0.62, 0.62];

function mix(a: Rgb, b: Rgb, t: number): Rgb {
  return [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t];
}

/**
 * Map a member force to a color. `scale` is the largest absolute force in
 * the result, so the two hues are used symmetrically about zero.
 */
export function forceColor(force: number, scale: number): Rgb {
  if (!Number.isFinite(force) || scale <= 0) return NEUTRAL;
  const t = Math.min(1, Math.abs(force) / scale);
  const eased = 0.25 + 0.75 * t; // keep small forces visibly tinted
  return force >= 0 ? mix(NEUTRAL, TENSION_HUE, eased) : mix(NEUTRAL, COMPRESSION_HUE, eased);
}

export function cssColor([r, g, b]: Rgb): string {
  const channel = (v: number) => Math.round(Math.min(1, Math.max(0, v)) * 255);
  return `rgb(${channel(r)}, ${channel(g)}, ${channel(b)})`;
}
