import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { parseSeriesCsv, parseSweepCsv } from "../src/csv.js";
import { recipeFor } from "../src/recipes.js";
import { renderRecipe } from "../src/render.js";

const f = (v: number): string => v.toExponential(17);

function seriesCsv(rows: Array<[number, number, string, number, number, number]>): string {
  const body = rows
    .map(([t, i, name, re, im, ab]) => `${f(t)},${i},${name},${f(re)},${f(im)},${f(ab)}`)
    .join("\n");
  return `time,index,observable,real,imag,abs\n${body}\n`;
}

function fig2SeriesCsv(): string {
  const rows: Array<[number, number, string, number, number, number]> = [];
  const times = [0, 20, 40, 60];
  for (const tag of ["J1", "J1-4"]) {
    for (const site of [0, 1, 2, 3, 4]) {
      // index 0 is the chain-averaged amplitude; panels show sites only
      for (const t of times) {
        const v = 0.5 * (1 - Math.exp(-t / 10)) * (1 - 0.01 * site);
        rows.push([t, site, `Phi:${tag}`, 0, v, v]);
      }
    }
    for (const r of [1, 2, 3]) {
      for (const t of times) {
        const v = 0.25 * (1 - Math.exp(-t / 12)) * (1 - 0.01 * r);
        rows.push([t, r, `C_r:${tag}`, v, 0, v]);
      }
    }
  }
  return seriesCsv(rows);
}

function fig4SweepCsv(): string {
  const lines = ["width,estimator,mean,se,n_ok,n_failed"];
  for (const w of [0, 2, 4, 8]) {
    lines.push(`${f(w)},abs_Phi_m,${f(0.497 - 0.001 * w)},${f(0.002)},25,0`);
    lines.push(`${f(w)},abs_C_m_r2,${f(0.246 - 0.001 * w)},${f(0.003)},25,0`);
  }
  return lines.join("\n") + "\n";
}

function writeRun(files: Record<string, string>): string {
  const dir = mkdtempSync(join(tmpdir(), "etachain-fig-"));
  for (const [name, text] of Object.entries(files)) {
    writeFileSync(join(dir, name), text);
  }
  return dir;
}

describe("csv parsing", () => {
  it("rejects an empty file naming it", () => {
    expect(() => parseSeriesCsv("", "runs/x/series.csv")).toThrow(/empty CSV file: runs\/x\/series\.csv/);
  });

  it("rejects a header-only file", () => {
    expect(() => parseSweepCsv("width,estimator,mean,se,n_ok,n_failed\n", "s.csv")).toThrow(
      /no data rows in s\.csv/,
    );
  });

  it("names the missing column", () => {
    const text = "time,index,observable,real,imag\n0,0,Phi,0,0\n";
    expect(() => parseSeriesCsv(text, "series.csv")).toThrow(/missing column 'abs' in series\.csv/);
  });
});

describe("figure 2 recipe", () => {
  it("renders four panels with dashed benchmark lines at 0.5 and 0.25", () => {
    const dir = writeRun({ "series.csv": fig2SeriesCsv() });
    const svg = renderRecipe(2, dir);
    expect(svg).toContain('data-benchmark="0.5"');
    expect(svg).toContain('data-benchmark="0.25"');
    expect(svg).toContain("stroke-dasharray");
    expect(svg).toContain('data-series="site 1"');
    expect(svg).toContain('data-series="r = 3"');
    expect(svg).not.toContain('data-series="site 0"'); // global mean stays out
  });

  it("re-rendering is byte-stable", () => {
    const dir = writeRun({ "series.csv": fig2SeriesCsv() });
    const first = renderRecipe(2, dir);
    const second = renderRecipe(2, dir);
    expect(second).toBe(first);
  });

  it("fails when the series file is missing", () => {
    const dir = writeRun({});
    expect(() => renderRecipe(2, dir)).toThrow(/needs .*series\.csv, which is missing/);
  });

  it("fails when the expected observables are absent", () => {
    const dir = writeRun({
      "series.csv": seriesCsv([[0, 1, "Phi:J2", 0, 0, 0]]),
    });
    expect(() => renderRecipe(2, dir)).toThrow(/observable 'Phi:J1' not found/);
  });
});

describe("sweep recipes", () => {
  it("figure 4 renders error bars and both benchmarks", () => {
    const dir = writeRun({ "sweep.csv": fig4SweepCsv() });
    const svg = renderRecipe(4, dir);
    expect(svg).toContain('class="errorbar"');
    expect(svg).toContain('data-benchmark="0.5"');
    expect(svg).toContain('data-benchmark="0.25"');
    expect(svg.match(/class="errorbar"/g)?.length).toBe(8); // 4 widths x 2 panels
  });

  it("byte-stable re-render", () => {
    const dir = writeRun({ "sweep.csv": fig4SweepCsv() });
    expect(renderRecipe(11, dir)).toBe(renderRecipe(11, dir));
  });

  it("rejects a sweep without the amplitude estimator", () => {
    const dir = writeRun({
      "sweep.csv": "width,estimator,mean,se,n_ok,n_failed\n0,weird,0.1,0,1,0\n",
    });
    expect(() => renderRecipe(4, dir)).toThrow(/'abs_Phi_m' not found/);
  });
});

describe("recipe table", () => {
  it("covers figures 2 through 11", () => {
    for (let id = 2; id <= 11; id += 1) {
      expect(recipeFor(id).id).toBe(id);
    }
    expect(() => recipeFor(12)).toThrow(/no recipe for figure 12/);
  });
});
