/**
 * Strict parsers for the ellopt CSV contracts.
 *
 * Field dumps: header `i,j,x,y,value` (2D) or `i,x,value` (1D), one
 * interior node per row, x index fastest. Report CSVs carry one row per
 * (scheme, mesh) with the fixed column set below. Anything off-contract
 * throws CsvError naming the offending column or row.
 */

export class CsvError extends Error {}

export interface FieldGrid {
  dim: 1 | 2;
  /** interior nodes per axis */
  m: number;
  /** interior axis coordinates (length m) */
  x: number[];
  /** 2D: values[i][j]; 1D: values[i][0] */
  values: number[][];
}

export interface ReportRow {
  scheme: string;
  problem: string;
  n: number;
  h: number;
  err_z: number;
  err_u: number;
  err_p: number;
  order_u: number | null;
  osc_index: number;
  solve_ms: number;
  residual: number;
}

const FIELD_HEADER_2D = ["i", "j", "x", "y", "value"];
const FIELD_HEADER_1D = ["i", "x", "value"];
export const REPORT_HEADER = [
  "scheme", "problem", "n", "h", "err_z", "err_u", "err_p",
  "order_u", "osc_index", "solve_ms", "residual",
];

function splitLines(text: string): string[] {
  return text.split(/\r?\n/).filter((line) => line.trim().length > 0);
}

function checkHeader(got: string[], expected: string[], what: string): void {
  for (const column of expected) {
    if (!got.includes(column)) {
      throw new CsvError(`${what}: missing column "${column}" in header [${got.join(",")}]`);
    }
  }
  if (got.length !== expected.length || expected.some((c, k) => got[k] !== c)) {
    throw new CsvError(
      `${what}: header [${got.join(",")}] does not match the contract [${expected.join(",")}]`
    );
  }
}

function num(token: string, where: string): number {
  const v = Number(token);
  if (token.trim() === "" || !Number.isFinite(v)) {
    throw new CsvError(`${where}: not a finite number: "${token}"`);
  }
  return v;
}

export function parseFieldCsv(text: string): FieldGrid {
  const lines = splitLines(text);
  if (lines.length === 0) {
    throw new CsvError("field CSV: file is empty");
  }
  const header = lines[0].split(",").map((t) => t.trim());
  const dim: 1 | 2 = header.length === 3 ? 1 : 2;
  checkHeader(header, dim === 1 ? FIELD_HEADER_1D : FIELD_HEADER_2D, "field CSV");
  const rows = lines.slice(1).map((line) => line.split(","));
  if (rows.length === 0) {
    throw new CsvError("field CSV: no data rows");
  }

  if (dim === 1) {
    const m = rows.length;
    const x = new Array<number>(m);
    const values: number[][] = Array.from({ length: m }, () => [NaN]);
    for (const row of rows) {
      if (row.length !== 3) throw new CsvError(`field CSV: bad row "${row.join(",")}"`);
      const i = num(row[0], "field CSV column i") - 1;
      if (i < 0 || i >= m) throw new CsvError(`field CSV: index i=${i + 1} out of range`);
      x[i] = num(row[1], "field CSV column x");
      values[i][0] = num(row[2], "field CSV column value");
    }
    return { dim, m, x, values };
  }

  const m = Math.round(Math.sqrt(rows.length));
  if (m * m !== rows.length) {
    throw new CsvError(`field CSV: ${rows.length} rows do not form a square grid`);
  }
  const x = new Array<number>(m).fill(NaN);
  const values: number[][] = Array.from({ length: m }, () => new Array<number>(m).fill(NaN));
  for (const row of rows) {
    if (row.length !== 5) throw new CsvError(`field CSV: bad row "${row.join(",")}"`);
    const i = num(row[0], "field CSV column i") - 1;
    const j = num(row[1], "field CSV column j") - 1;
    if (i < 0 || i >= m || j < 0 || j >= m) {
      throw new CsvError(`field CSV: node (${i + 1},${j + 1}) out of range for m=${m}`);
    }
    x[i] = num(row[2], "field CSV column x");
    values[i][j] = num(row[4], "field CSV column value");
  }
  for (let i = 0; i < m; i++) {
    for (let j = 0; j < m; j++) {
      if (!Number.isFinite(values[i][j])) {
        throw new CsvError(`field CSV: node (${i + 1},${j + 1}) missing`);
      }
    }
  }
  return { dim, m, x, values };
}

export function parseReportCsv(text: string): ReportRow[] {
  const lines = splitLines(text);
  if (lines.length === 0) {
    throw new CsvError("report CSV: file is empty");
  }
  checkHeader(lines[0].split(",").map((t) => t.trim()), REPORT_HEADER, "report CSV");
  if (lines.length === 1) {
    throw new CsvError("report CSV: no data rows");
  }
  return lines.slice(1).map((line) => {
    const t = line.split(",");
    if (t.length !== REPORT_HEADER.length) {
      throw new CsvError(`report CSV: bad row "${line}"`);
    }
    return {
      scheme: t[0],
      problem: t[1],
      n: num(t[2], "report CSV column n"),
      h: num(t[3], "report CSV column h"),
      err_z: num(t[4], "report CSV column err_z"),
      err_u: num(t[5], "report CSV column err_u"),
      err_p: num(t[6], "report CSV column err_p"),
      order_u: t[7].trim() === "" ? null : num(t[7], "report CSV column order_u"),
      osc_index: num(t[8], "report CSV column osc_index"),
      solve_ms: num(t[9], "report CSV column solve_ms"),
      residual: num(t[10], "report CSV column residual"),
    };
  });
}

export function groupByScheme(rows: ReportRow[]): Map<string, ReportRow[]> {
  const out = new Map<string, ReportRow[]>();
  for (const row of rows) {
    const bucket = out.get(row.scheme) ?? [];
    bucket.push(row);
    out.set(row.scheme, bucket);
  }
  for (const bucket of out.values()) {
    bucket.sort((a, b) => a.n - b.n);
  }
  return out;
}

export function fieldRange(fields: FieldGrid[]): { min: number; max: number } {
  let min = Infinity;
  let max = -Infinity;
  for (const f of fields) {
    for (const col of f.values) {
      for (const v of col) {
        if (v < min) min = v;
        if (v > max) max = v;
      }
    }
  }
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  return { min, max };
}
