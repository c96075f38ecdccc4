import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import { CsvError, loadCsv, requireColumns } from "../src/csv.js";

const FIXTURES = join(__dirname, "fixtures");

function tempCsv(content: string): string {
  const dir = mkdtempSync(join(tmpdir(), "faa-plots-"));
  const path = join(dir, "t.csv");
  writeFileSync(path, content);
  return path;
}

describe("loadCsv", () => {
  it("loads the summary fixture with its schema", () => {
    const table = loadCsv(join(FIXTURES, "sweep_small_summary.csv"));
    expect(table.columns).toEqual([
      "model",
      "scheme",
      "axis",
      "value",
      "n_trials",
      "mean_r_s_bps_hz",
      "stderr_r_s_bps_hz",
    ]);
    expect(table.rows.length).toBe(6); // 2 models x 3 power levels
  });

  it("rejects files with no data rows", () => {
    const path = tempCsv("a,b,c\n");
    expect(() => loadCsv(path)).toThrow(CsvError);
    expect(() => loadCsv(path)).toThrow(/no data rows/);
  });

  it("rejects missing files with a readable message", () => {
    expect(() => loadCsv("/nonexistent/nope.csv")).toThrow(/cannot read/);
  });

  it("names missing columns", () => {
    const table = loadCsv(tempCsv("a,b\n1,2\n"));
    expect(() => requireColumns(table, ["a", "mean_r_s_bps_hz"], "t.csv")).toThrow(
      /missing required column\(s\): mean_r_s_bps_hz/,
    );
  });
});
