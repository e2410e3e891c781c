export { CsvError, parseFieldCsv, parseReportCsv, groupByScheme, fieldRange } from "./csv.js";
export type { FieldGrid, ReportRow } from "./csv.js";
export { renderSurfacePair, surfacePanel, colorbar } from "./surface.js";
export { renderColorMap, colorMapPanel } from "./colormap.js";
export { renderConvergence } from "./convergence.js";
export { renderSweepGrid, sweepLabel } from "./sweepgrid.js";
export { parseArgs, render, main } from "./cli.js";
export { colormap } from "./color.js";
