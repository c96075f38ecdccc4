/**
 * End-to-end check against the real simulation outputs: renders the
 * convergence trace and all five sweep summaries exported by the Python
 * acceptance suite (artifacts/), verifying one series per (model, scheme),
 * labelled axes, and machine-exact agreement between the plotted values and
 * the CSV.  Skips when the artifacts have not been generated yet (the
 * fixture-based tests cover the same code paths).
 */

import { existsSync, mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import { loadCsv } from "../src/csv.js";
import { renderFigure } from "../src/render.js";

const ARTIFACTS = join(__dirname, "..", "..", "artifacts");

const SWEEPS = ["pmax", "n", "m", "kappa", "xi"] as const;

function metadata(svg: string) {
  const match = svg.match(/<metadata id="series-data">(.*?)<\/metadata>/s);
  const unescaped = match![1]
    .replace(/&quot;/g, '"')
    .replace(/&lt;/g, "<")
    .replace(/&gt;/g, ">")
    .replace(/&amp;/g, "&");
  return JSON.parse(unescaped);
}

describe("figure pipeline on simulation artifacts", () => {
  const available = existsSync(join(ARTIFACTS, "convergence.csv"));

  it.skipIf(!available)("renders all five sweeps plus the convergence trace", () => {
    const dir = mkdtempSync(join(tmpdir(), "faa-plots-accept-"));
    const written: string[] = [];

    for (const name of SWEEPS) {
      const csv = join(ARTIFACTS, `sweep_${name}_summary.csv`);
      expect(existsSync(csv), `${csv} missing`).toBe(true);
      const out = join(dir, `${name}.svg`);
      const svg = renderFigure({ csvPath: csv, kind: "sweep", xColumn: "value", outPath: out });
      written.push(out);

      const table = loadCsv(csv);
      const meta = metadata(svg);
      const expectedGroups = new Set(table.rows.map((r) => `${r.model}/${r.scheme}`));
      expect(new Set(meta.series.map((s: { label: string }) => s.label))).toEqual(expectedGroups);
      expect(svg).toContain("secrecy rate R_s (bps/Hz)");
      // plotted values equal the summary CSV exactly
      for (const series of meta.series) {
        const [model, scheme] = series.label.split("/");
        const rows = table.rows
          .filter((r) => r.model === model && r.scheme === scheme)
          .sort((a, b) => Number(a.value) - Number(b.value));
        expect(series.x).toEqual(rows.map((r) => Number(r.value)));
        expect(series.y).toEqual(rows.map((r) => Number(r.mean_r_s_bps_hz)));
        expect(series.stderr).toEqual(rows.map((r) => Number(r.stderr_r_s_bps_hz)));
      }
    }

    const convOut = join(dir, "convergence.svg");
    const convSvg = renderFigure({
      csvPath: join(ARTIFACTS, "convergence.csv"),
      kind: "convergence",
      xColumn: "k",
      outPath: convOut,
    });
    written.push(convOut);
    expect(convSvg).toContain("AO iteration k");

    expect(written.length).toBe(6);
    for (const path of written) {
      expect(existsSync(path)).toBe(true);
    }
  });
});
