/**
 * 3D surface renderer: oblique projection of a gridded field, painter-sorted
 * quads colored by height. Pure string output; identical input yields an
 * identical SVG.
 */

import { FieldGrid, fieldRange, CsvError } from "./csv.js";
import { colormap, unit } from "./color.js";
import { colorbarTicks } from "./scale.js";
import { document as svgDocument, el, text } from "./svg.js";

export interface SurfaceOptions {
  title?: string;
  panelWidth?: number;
  panelHeight?: number;
}

function require2d(field: FieldGrid): void {
  if (field.dim !== 2) {
    throw new CsvError("surface rendering needs a 2D field CSV (i,j,x,y,value)");
  }
}

function projector(
  m: number,
  vmin: number,
  vmax: number,
  px: number,
  py: number,
  pw: number,
  ph: number
) {
  const span = m - 1;
  return (i: number, j: number, v: number): [number, number] => {
    const a = i / span;
    const b = j / span;
    const t = unit(v, vmin, vmax);
    const sx = px + ((a - b + 1) / 2) * pw;
    const sy = py + ph * 0.5 + ((a + b) / 2) * ph * 0.38 - t * ph * 0.42;
    return [sx, sy];
  };
}

/** One surface panel drawn at (px, py); shared [vmin, vmax] color range. */
export function surfacePanel(
  field: FieldGrid,
  vmin: number,
  vmax: number,
  px: number,
  py: number,
  pw: number,
  ph: number,
  label: string
): string {
  require2d(field);
  const m = field.m;
  const project = projector(m, vmin, vmax, px, py, pw, ph);
  const quads: { depth: number; svg: string }[] = [];
  for (let i = 0; i < m - 1; i++) {
    for (let j = 0; j < m - 1; j++) {
      const corners: [number, number][] = [
        project(i, j, field.values[i][j]),
        project(i + 1, j, field.values[i + 1][j]),
        project(i + 1, j + 1, field.values[i + 1][j + 1]),
        project(i, j + 1, field.values[i][j + 1]),
      ];
      const mean =
        (field.values[i][j] +
          field.values[i + 1][j] +
          field.values[i + 1][j + 1] +
          field.values[i][j + 1]) /
        4;
      const pts = corners.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
      quads.push({
        depth: i + j,
        svg: el("polygon", {
          points: pts,
          fill: colormap(unit(mean, vmin, vmax)),
          stroke: "rgba(0,0,0,0.18)",
          "stroke-width": 0.4,
        }),
      });
    }
  }
  quads.sort((a, b) => a.depth - b.depth || a.svg.localeCompare(b.svg));
  const parts = quads.map((q) => q.svg);
  parts.push(
    text(px + pw / 2, py + ph - 4, label, { "text-anchor": "middle", "font-size": 13 })
  );
  return parts.join("\n");
}

export function colorbar(
  vmin: number,
  vmax: number,
  x: number,
  y: number,
  height: number
): string {
  const parts: string[] = [];
  const steps = 64;
  const cell = height / steps;
  for (let k = 0; k < steps; k++) {
    parts.push(
      el("rect", {
        x,
        y: y + height - (k + 1) * cell,
        width: 14,
        height: cell + 0.5,
        fill: colormap(k / (steps - 1)),
      })
    );
  }
  parts.push(el("rect", { x, y, width: 14, height, fill: "none", stroke: "#555" }));
  for (const tick of colorbarTicks(vmin, vmax)) {
    const ty = y + height - unit(tick, vmin, vmax) * height;
    parts.push(text(x + 18, ty + 4, tick.toPrecision(3), { "font-size": 10 }));
  }
  return parts.join("\n");
}

/** Side-by-side surfaces with a shared color range (comparison figure). */
export function renderSurfacePair(
  left: FieldGrid,
  right: FieldGrid,
  labels: [string, string],
  opts: SurfaceOptions = {}
): string {
  require2d(left);
  require2d(right);
  const pw = opts.panelWidth ?? 360;
  const ph = opts.panelHeight ?? 300;
  const gap = 30;
  const width = 2 * pw + gap + 100;
  const height = ph + 60;
  const { min, max } = fieldRange([left, right]);
  const parts: string[] = [];
  if (opts.title) {
    parts.push(text(width / 2, 22, opts.title, { "text-anchor": "middle", "font-size": 15 }));
  }
  parts.push(surfacePanel(left, min, max, 10, 34, pw, ph, labels[0]));
  parts.push(surfacePanel(right, min, max, 10 + pw + gap, 34, pw, ph, labels[1]));
  parts.push(colorbar(min, max, 2 * pw + gap + 30, 50, ph - 60));
  return svgDocument(width, height, parts.join("\n"));
}
