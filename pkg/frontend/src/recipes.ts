/**
 * Figure recipes: which CSV inputs each figure consumes and how its panels
 * are laid out. Benchmarks 0.5 (on-site amplitude) and 0.25 (pair correlator)
 * are drawn as dashed lines; sweep panels carry error bars.
 */

import { groupSeries, parseSeriesCsv, parseSweepCsv, SeriesRow, SweepRow } from "./csv.js";
import { Panel } from "./svg.js";

export interface FigureRecipe {
  id: number;
  title: string;
  /** CSV files consumed, relative to the run directory */
  inputs: string[];
  columns: number;
  build: (files: Map<string, string>) => Panel[];
}

const PHI_BENCH = 0.5;
const CORR_BENCH = 0.25;

function seriesByName(files: Map<string, string>, name: string): Map<string, SeriesRow[]> {
  const text = files.get(name);
  if (text === undefined) throw new Error(`recipe input not resolved: ${name}`);
  return groupSeries(parseSeriesCsv(text, name));
}

function indexedLines(groups: Map<string, SeriesRow[]>, observable: string, prefix: string) {
  const rows = groups.get(observable);
  if (!rows) {
    const known = [...groups.keys()].sort().join(", ");
    throw new Error(`observable '${observable}' not found (have: ${known})`);
  }
  const byIndex = new Map<number, SeriesRow[]>();
  for (const row of rows) {
    if (row.index === 0) continue; // index 0 carries the global average
    const bucket = byIndex.get(row.index);
    if (bucket) bucket.push(row);
    else byIndex.set(row.index, [row]);
  }
  if (byIndex.size === 0) {
    throw new Error(`observable '${observable}' has no site/separation-resolved rows`);
  }
  return [...byIndex.entries()]
    .sort((a, b) => a[0] - b[0])
    .map(([index, pts]) => ({
      label: `${prefix}${index}`,
      x: pts.map((p) => p.time),
      y: pts.map((p) => p.abs),
    }));
}

function timePanels(files: Map<string, string>, variants: string[], variantLabels: string[]): Panel[] {
  const groups = seriesByName(files, "series.csv");
  const panels: Panel[] = [];
  variants.forEach((tag, k) => {
    panels.push({
      title: `|Phi_i|, ${variantLabels[k]}`,
      xLabel: "time (1/gamma)",
      yLabel: "|Phi_i|",
      lines: indexedLines(groups, `Phi:${tag}`, "site "),
      benchmarks: [PHI_BENCH],
      yMin: 0,
      yMax: 0.55,
      markers: false,
    });
  });
  variants.forEach((tag, k) => {
    panels.push({
      title: `|C(r)|, ${variantLabels[k]}`,
      xLabel: "time (1/gamma)",
      yLabel: "|C(r)|",
      lines: indexedLines(groups, `C_r:${tag}`, "r = "),
      benchmarks: [CORR_BENCH],
      yMin: 0,
      yMax: 0.3,
      markers: false,
    });
  });
  return panels;
}

function sweepPanels(files: Map<string, string>, xLabel: string, xScale = 1.0): Panel[] {
  const text = files.get("sweep.csv");
  if (text === undefined) throw new Error("recipe input not resolved: sweep.csv");
  const rows = parseSweepCsv(text, "sweep.csv");
  const byEstimator = new Map<string, SweepRow[]>();
  for (const row of rows) {
    const bucket = byEstimator.get(row.estimator);
    if (bucket) bucket.push(row);
    else byEstimator.set(row.estimator, [row]);
  }
  const phi = byEstimator.get("abs_Phi_m");
  if (!phi) throw new Error("estimator 'abs_Phi_m' not found in sweep.csv");
  const corrKey = [...byEstimator.keys()].find((k) => k.startsWith("abs_C_m"));
  if (!corrKey) throw new Error("estimator 'abs_C_m_r*' not found in sweep.csv");
  const corr = byEstimator.get(corrKey) as SweepRow[];
  const mk = (data: SweepRow[], label: string): Panel["lines"][0] => ({
    label,
    x: data.map((r) => r.width / xScale),
    y: data.map((r) => r.mean),
    yerr: data.map((r) => r.se),
  });
  return [
    {
      title: "disorder-averaged |Phi_m|",
      xLabel,
      yLabel: "|Phi_m|",
      lines: [mk(phi, "|Phi_m|")],
      benchmarks: [PHI_BENCH],
      yMin: 0,
      yMax: 0.55,
      markers: true,
    },
    {
      title: `disorder-averaged |C_m| (${corrKey.replace("abs_C_m_", "")})`,
      xLabel,
      yLabel: "|C_m|",
      lines: [mk(corr, "|C_m|")],
      benchmarks: [CORR_BENCH],
      yMin: 0,
      yMax: 0.3,
      markers: true,
    },
  ];
}

function sweepRecipe(id: number, title: string, xLabel: string, xScale = 1.0): FigureRecipe {
  return {
    id,
    title,
    inputs: ["sweep.csv"],
    columns: 2,
    build: (files) => sweepPanels(files, xLabel, xScale),
  };
}

export const RECIPES: FigureRecipe[] = [
  {
    id: 2,
    title: "pair-coherence buildup, N=4 open chain",
    inputs: ["series.csv"],
    columns: 2,
    build: (files) => timePanels(files, ["J1", "J1-4"], ["driven {1}", "driven {1,4}"]),
  },
  {
    id: 3,
    title: "finite-size overlay of global order parameters",
    inputs: ["series.csv"],
    columns: 2,
    build: (files) => {
      const groups = seriesByName(files, "series.csv");
      const sizes = [...groups.keys()]
        .filter((k) => k.startsWith("Phi:N"))
        .map((k) => k.slice("Phi:N".length))
        .sort((a, b) => Number(a) - Number(b));
      if (sizes.length === 0) throw new Error("observable 'Phi:N*' not found in series.csv");
      const line = (name: string, label: string) => {
        const pts = groups.get(name) as SeriesRow[];
        return { label, x: pts.map((p) => p.time), y: pts.map((p) => p.abs) };
      };
      return [
        {
          title: "global |Phi|",
          xLabel: "time (1/gamma)",
          yLabel: "|Phi|",
          lines: sizes.map((n) => line(`Phi:N${n}`, `N = ${n}`)),
          benchmarks: [PHI_BENCH],
          yMin: 0,
          yMax: 0.55,
          markers: false,
        },
        {
          title: "structure factor |S_eta|",
          xLabel: "time (1/gamma)",
          yLabel: "|S_eta|",
          lines: sizes.map((n) => line(`S_eta:N${n}`, `N = ${n}`)),
          benchmarks: [CORR_BENCH],
          yMin: 0,
          yMax: 0.3,
          markers: false,
        },
      ];
    },
  },
  sweepRecipe(4, "interaction disorder", "W_U / gamma"),
  sweepRecipe(5, "pump-rate disorder", "W_gamma / gamma"),
  sweepRecipe(6, "Zeeman disorder", "W_Z / gamma"),
  sweepRecipe(7, "bond disorder", "W_t / gamma"),
  sweepRecipe(8, "potential disorder", "W_mu / gamma"),
  sweepRecipe(9, "transverse-field disorder", "W_perp / gamma"),
  sweepRecipe(10, "rotation-angle disorder", "W_theta / pi", Math.PI),
  sweepRecipe(11, "single-particle loss", "kappa / gamma"),
];

export function recipeFor(id: number): FigureRecipe {
  const recipe = RECIPES.find((r) => r.id === id);
  if (!recipe) {
    throw new Error(`no recipe for figure ${id} (known: ${RECIPES.map((r) => r.id).join(", ")})`);
  }
  return recipe;
}
