/**
 * Strict CSV loading for the harness schemas.
 *
 * Fails fast (CsvError) when a required column is missing or the file has
 * no data rows; never guesses at malformed input.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export class CsvError extends Error {}

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

export function loadCsv(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch (err) {
    throw new CsvError(`cannot read CSV file ${path}: ${String(err)}`);
  }
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new CsvError(
      `malformed CSV ${path}: ${first.message} (row ${first.row})`,
    );
  }
  const columns = parsed.meta.fields ?? [];
  if (columns.length === 0) {
    throw new CsvError(`empty CSV ${path}: no header row`);
  }
  if (parsed.data.length === 0) {
    throw new CsvError(`empty CSV ${path}: header but no data rows`);
  }
  return { columns, rows: parsed.data };
}

export function requireColumns(table: Table, needed: string[], path: string): void {
  const missing = needed.filter((c) => !table.columns.includes(c));
  if (missing.length > 0) {
    throw new CsvError(
      `CSV ${path} is missing required column(s): ${missing.join(", ")} ` +
        `(found: ${table.columns.join(", ")})`,
    );
  }
}

/** Parse a numeric cell exactly (IEEE double round trip). */
export function num(row: Record<string, string>, column: string, path: string): number {
  const raw = row[column];
  const value = Number(raw);
  if (raw === undefined || raw === "" || Number.isNaN(value)) {
    throw new CsvError(`CSV ${path}: non-numeric value ${JSON.stringify(raw)} in column ${column}`);
  }
  return value;
}
