/** Flat color-map (heatmap) rendering of a 2D gridded field. */

import { FieldGrid, fieldRange, CsvError } from "./csv.js";
import { colormap, unit } from "./color.js";
import { document as svgDocument, el, text } from "./svg.js";
import { colorbar } from "./surface.js";

export interface ColorMapOptions {
  title?: string;
  panelSize?: number;
}

/** One heatmap panel at (px, py) with side length size. */
export function colorMapPanel(
  field: FieldGrid,
  vmin: number,
  vmax: number,
  px: number,
  py: number,
  size: number,
  label: string
): string {
  if (field.dim !== 2) {
    throw new CsvError("colormap rendering needs a 2D field CSV (i,j,x,y,value)");
  }
  const m = field.m;
  const cell = size / m;
  const parts: string[] = [];
  for (let i = 0; i < m; i++) {
    for (let j = 0; j < m; j++) {
      parts.push(
        el("rect", {
          x: px + i * cell,
          y: py + (m - 1 - j) * cell,
          width: cell + 0.3,
          height: cell + 0.3,
          fill: colormap(unit(field.values[i][j], vmin, vmax)),
        })
      );
    }
  }
  parts.push(el("rect", { x: px, y: py, width: size, height: size, fill: "none", stroke: "#555" }));
  parts.push(text(px + size / 2, py + size + 16, label, { "text-anchor": "middle" }));
  parts.push(text(px - 4, py + size + 4, "0", { "text-anchor": "end", "font-size": 10 }));
  parts.push(text(px + size, py + size + 16, "x=1", { "text-anchor": "middle", "font-size": 10 }));
  parts.push(text(px - 4, py + 8, "y=1", { "text-anchor": "end", "font-size": 10 }));
  return parts.join("\n");
}

export function renderColorMap(field: FieldGrid, opts: ColorMapOptions = {}): string {
  const size = opts.panelSize ?? 380;
  const width = size + 130;
  const height = size + 70;
  const { min, max } = fieldRange([field]);
  const parts: string[] = [];
  if (opts.title) {
    parts.push(text(width / 2, 20, opts.title, { "text-anchor": "middle", "font-size": 15 }));
  }
  parts.push(colorMapPanel(field, min, max, 40, 34, size, ""));
  parts.push(colorbar(min, max, size + 60, 50, size - 40));
  return svgDocument(width, height, parts.join("\n"));
}
