/**
 * Log-log convergence plot from a study report CSV: control error vs mesh
 * width per scheme, with dashed slope-2 and slope-4 reference lines.
 */

import { CsvError, ReportRow, groupByScheme } from "./csv.js";
import { decadeTicks, expLabel, logScale } from "./scale.js";
import { document as svgDocument, el, text } from "./svg.js";

const PALETTE = ["#4361ee", "#e63946", "#2d6a4f", "#f3722c", "#7209b7", "#118ab2"];

export interface ConvergenceOptions {
  title?: string;
  width?: number;
  height?: number;
}

export function renderConvergence(rows: ReportRow[], opts: ConvergenceOptions = {}): string {
  const width = opts.width ?? 560;
  const height = opts.height ?? 430;
  const box = { left: 70, right: width - 170, top: 40, bottom: height - 55 };
  const bySchemes = groupByScheme(rows);
  if (bySchemes.size === 0) {
    throw new CsvError("report CSV: no rows to plot");
  }
  const hs = rows.map((r) => r.h);
  const errs = rows.map((r) => r.err_u).filter((e) => e > 0);
  if (errs.length === 0) {
    throw new CsvError("report CSV: no positive err_u values");
  }
  const hMin = Math.min(...hs);
  const hMax = Math.max(...hs);
  const eMin = Math.min(...errs) * 0.4;
  const eMax = Math.max(...errs) * 2.5;
  const sx = logScale(hMin, hMax, box.left, box.right);
  const sy = logScale(eMin, eMax, box.bottom, box.top);

  const parts: string[] = [];
  if (opts.title) {
    parts.push(text(width / 2, 20, opts.title, { "text-anchor": "middle", "font-size": 15 }));
  }
  // frame and decade grid
  parts.push(
    el("rect", {
      x: box.left, y: box.top,
      width: box.right - box.left, height: box.bottom - box.top,
      fill: "none", stroke: "#444",
    })
  );
  for (const tick of decadeTicks(hMin, hMax)) {
    const x = sx(tick);
    parts.push(el("line", { x1: x, y1: box.top, x2: x, y2: box.bottom, stroke: "#ddd" }));
    parts.push(text(x, box.bottom + 16, expLabel(tick), { "text-anchor": "middle", "font-size": 10 }));
  }
  for (const tick of decadeTicks(eMin, eMax)) {
    const y = sy(tick);
    parts.push(el("line", { x1: box.left, y1: y, x2: box.right, y2: y, stroke: "#ddd" }));
    parts.push(text(box.left - 6, y + 3, expLabel(tick), { "text-anchor": "end", "font-size": 10 }));
  }
  parts.push(text((box.left + box.right) / 2, height - 14, "h", { "text-anchor": "middle" }));
  parts.push(
    text(18, (box.top + box.bottom) / 2, "control error (inf-norm)", {
      "text-anchor": "middle",
      transform: `rotate(-90 18 ${(box.top + box.bottom) / 2})`,
    })
  );

  // slope reference lines through an anchor below the data cloud
  for (const [order, dash] of [[2, "6,4"], [4, "2,3"]] as [number, string][]) {
    const anchor = Math.min(...errs) * 0.7;
    const c = anchor / hMin ** order;
    // clip the line to the y-range in log space
    let h0 = hMin;
    let h1 = hMax;
    const hFor = (e: number) => (e / c) ** (1 / order);
    if (c * h1 ** order > eMax) h1 = hFor(eMax);
    if (c * h0 ** order < eMin) h0 = hFor(eMin);
    parts.push(
      el("line", {
        x1: sx(h0), y1: sy(c * h0 ** order),
        x2: sx(h1), y2: sy(c * h1 ** order),
        stroke: "#888", "stroke-dasharray": dash,
      })
    );
    const hm = Math.sqrt(h0 * h1);
    parts.push(
      text(sx(hm) + 6, sy(c * hm ** order) + 12, `slope ${order}`, {
        "font-size": 10, fill: "#666",
      })
    );
  }

  // series
  let k = 0;
  for (const [scheme, schemeRows] of bySchemes) {
    const color = PALETTE[k % PALETTE.length];
    const pts = schemeRows
      .filter((r) => r.err_u > 0)
      .map((r) => `${sx(r.h).toFixed(2)},${sy(r.err_u).toFixed(2)}`);
    parts.push(
      el("polyline", { points: pts.join(" "), fill: "none", stroke: color, "stroke-width": 1.6 })
    );
    for (const r of schemeRows) {
      if (r.err_u > 0) {
        parts.push(el("circle", { cx: sx(r.h), cy: sy(r.err_u), r: 3, fill: color }));
      }
    }
    const ly = box.top + 14 + 18 * k;
    parts.push(el("line", { x1: box.right + 10, y1: ly - 4, x2: box.right + 34, y2: ly - 4, stroke: color, "stroke-width": 2 }));
    parts.push(text(box.right + 40, ly, scheme, { "font-size": 11 }));
    k += 1;
  }
  return svgDocument(width, height, parts.join("\n"));
}
