/**
 * Comment-aware CSV parsing for ethlab output files.
 *
 * The files are plain comma-separated tables with '#' metadata lines on top
 * and no quoting, so a hand-rolled parser keeps things dependency-free and
 * byte-deterministic.
 */

export class MissingColumnError extends Error {
  constructor(public readonly column: string, file?: string) {
    super(`missing column "${column}"${file ? ` in ${file}` : ""}`);
    this.name = "MissingColumnError";
  }
}

export interface Table {
  header: string[];
  rows: string[][];
  /** source path, for error messages */
  source?: string;
}

export function parseCsv(text: string, source?: string): Table {
  const lines = text
    .split(/\r?\n/)
    .filter((ln) => ln.length > 0 && !ln.startsWith("#"));
  if (lines.length === 0) {
    throw new Error(`no data lines${source ? ` in ${source}` : ""}`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((ln) => ln.split(","));
  return { header, rows, source };
}

export function columnIndex(table: Table, name: string): number {
  const idx = table.header.indexOf(name);
  if (idx < 0) throw new MissingColumnError(name, table.source);
  return idx;
}

/** Numeric column; empty cells become NaN so callers can filter them. */
export function numericColumn(table: Table, name: string): number[] {
  const idx = columnIndex(table, name);
  return table.rows.map((r) => (r[idx] === "" ? NaN : Number(r[idx])));
}

export function stringColumn(table: Table, name: string): string[] {
  const idx = columnIndex(table, name);
  return table.rows.map((r) => r[idx]);
}

/** Rows where `column` equals `value` (string comparison on raw cells). */
export function filterRows(table: Table, column: string, value: string): Table {
  const idx = columnIndex(table, column);
  return {
    header: table.header,
    rows: table.rows.filter((r) => r[idx] === value),
    source: table.source,
  };
}

export function distinctValues(table: Table, column: string): string[] {
  const idx = columnIndex(table, column);
  const seen: string[] = [];
  for (const row of table.rows) {
    if (!seen.includes(row[idx])) seen.push(row[idx]);
  }
  return seen;
}
