/**
 * Strict readers for the simulator's CSV contract.
 *
 * series.csv: time,index,observable,real,imag,abs
 * sweep.csv:  width,estimator,mean,se,n_ok,n_failed
 *
 * A missing column or an empty payload is a fatal error naming the offender.
 */

export interface SeriesRow {
  time: number;
  index: number;
  observable: string;
  real: number;
  imag: number;
  abs: number;
}

export interface SweepRow {
  width: number;
  estimator: string;
  mean: number;
  se: number;
  nOk: number;
  nFailed: number;
}

const SERIES_COLUMNS = ["time", "index", "observable", "real", "imag", "abs"];
const SWEEP_COLUMNS = ["width", "estimator", "mean", "se", "n_ok", "n_failed"];

function splitCsv(text: string, path: string, expected: string[]): string[][] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error(`empty CSV file: ${path}`);
  }
  const header = lines[0].split(",");
  for (const col of expected) {
    if (!header.includes(col)) {
      throw new Error(`missing column '${col}' in ${path} (header: ${lines[0]})`);
    }
  }
  if (lines.length === 1) {
    throw new Error(`no data rows in ${path}`);
  }
  const order = expected.map((col) => header.indexOf(col));
  return lines.slice(1).map((line) => {
    const cells = line.split(",");
    return order.map((k) => cells[k] ?? "");
  });
}

function num(cell: string, what: string, path: string): number {
  const v = Number(cell);
  if (!Number.isFinite(v)) {
    throw new Error(`non-numeric ${what} value '${cell}' in ${path}`);
  }
  return v;
}

export function parseSeriesCsv(text: string, path: string): SeriesRow[] {
  return splitCsv(text, path, SERIES_COLUMNS).map((cells) => ({
    time: num(cells[0], "time", path),
    index: Math.trunc(num(cells[1], "index", path)),
    observable: cells[2],
    real: num(cells[3], "real", path),
    imag: num(cells[4], "imag", path),
    abs: num(cells[5], "abs", path),
  }));
}

export function parseSweepCsv(text: string, path: string): SweepRow[] {
  return splitCsv(text, path, SWEEP_COLUMNS).map((cells) => ({
    width: num(cells[0], "width", path),
    estimator: cells[1],
    mean: num(cells[2], "mean", path),
    se: num(cells[3], "se", path),
    nOk: Math.trunc(num(cells[4], "n_ok", path)),
    nFailed: Math.trunc(num(cells[5], "n_failed", path)),
  }));
}

/** Group series rows by observable name, each sorted by time then index. */
export function groupSeries(rows: SeriesRow[]): Map<string, SeriesRow[]> {
  const groups = new Map<string, SeriesRow[]>();
  for (const row of rows) {
    const bucket = groups.get(row.observable);
    if (bucket) bucket.push(row);
    else groups.set(row.observable, [row]);
  }
  for (const bucket of groups.values()) {
    bucket.sort((a, b) => a.time - b.time || a.index - b.index);
  }
  return groups;
}
