// Client-side heat strip: the annotator sees where the feature signal moves,
// rendered straight from the clip's feature slice. No image assets.

export function frameNorms(context: number[][]): number[] {
  return context.map((row) => Math.hypot(...row));
}

/** Per-frame feature change ||x_t - x_{t-1}||; first frame gets 0. */
export function frameChanges(context: number[][]): number[] {
  return context.map((row, t) => {
    if (t === 0) return 0;
    const prev = context[t - 1];
    return Math.hypot(...row.map((v, d) => v - prev[d]));
  });
}

/** Scale values to [0, 1]; a constant strip maps to all zeros. */
export function normalize(values: number[]): number[] {
  if (values.length === 0) return [];
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  if (hi - lo < 1e-12) return values.map(() => 0);
  return values.map((v) => (v - lo) / (hi - lo));
}

export function heatColor(v: number): string {
  const t = Math.max(0, Math.min(1, v));
  // cold steel blue to hot amber
  const hue = 215 - 170 * t;
  const light = 18 + 42 * t;
  return `hsl(${hue.toFixed(0)}, 80%, ${light.toFixed(0)}%)`;
}

export interface StripModel {
  colors: string[];
  centerIndex: number; // which cell is the queried frame
}

export function buildStrip(
  context: number[][] | null,
  frame: number,
  lo: number,
): StripModel | null {
  if (!context || context.length === 0) return null;
  const colors = normalize(frameChanges(context)).map(heatColor);
  const centerIndex = Math.max(0, Math.min(frame - lo, context.length - 1));
  return { colors, centerIndex };
}
