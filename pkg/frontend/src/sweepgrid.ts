/** Grid of heatmap panels over a regularization-weight sweep, shared scale. */

import { CsvError, FieldGrid, fieldRange } from "./csv.js";
import { colorMapPanel } from "./colormap.js";
import { colorbar } from "./surface.js";
import { document as svgDocument, text } from "./svg.js";

export interface SweepEntry {
  label: string;
  field: FieldGrid;
}

export interface SweepGridOptions {
  title?: string;
  panelSize?: number;
  perRow?: number;
}

export function renderSweepGrid(entries: SweepEntry[], opts: SweepGridOptions = {}): string {
  if (entries.length === 0) {
    throw new CsvError("sweep grid: no fields given");
  }
  const size = opts.panelSize ?? 240;
  const perRow = opts.perRow ?? Math.min(entries.length, 3);
  const gap = 28;
  const rows = Math.ceil(entries.length / perRow);
  const width = perRow * (size + gap) + 110;
  const height = rows * (size + gap + 24) + 40;
  const { min, max } = fieldRange(entries.map((e) => e.field));
  const parts: string[] = [];
  if (opts.title) {
    parts.push(text(width / 2, 20, opts.title, { "text-anchor": "middle", "font-size": 15 }));
  }
  entries.forEach((entry, k) => {
    const row = Math.floor(k / perRow);
    const col = k % perRow;
    const px = 40 + col * (size + gap);
    const py = 34 + row * (size + gap + 24);
    parts.push(colorMapPanel(entry.field, min, max, px, py, size, entry.label));
  });
  parts.push(colorbar(min, max, perRow * (size + gap) + 30, 50, size - 20));
  return svgDocument(width, height, parts.join("\n"));
}

/** Pull a "gamma ..." label out of a sweep file name, else the basename. */
export function sweepLabel(path: string): string {
  const base = path.split(/[\\/]/).pop() ?? path;
  const match = base.match(/gamma([0-9eE.+-]+)_/);
  return match ? `gamma ${match[1]}` : base.replace(/\.csv$/i, "");
}
