/**
 * Deterministic SVG line-panel renderer: no timestamps, fixed numeric
 * precision, stable element order, so identical input bytes render to
 * identical output bytes.
 */

export interface Line {
  label: string;
  x: number[];
  y: number[];
  /** symmetric error bars on y, one entry per point */
  yerr?: number[];
  color?: string;
}

export interface Panel {
  title: string;
  xLabel: string;
  yLabel: string;
  lines: Line[];
  /** dashed horizontal reference lines (benchmark values) */
  benchmarks: number[];
  yMin?: number;
  yMax?: number;
  markers?: boolean;
}

const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
  "#8c564b", "#17becf", "#7f7f7f",
];

const W = 430;
const H = 320;
const MARGIN = { left: 58, right: 16, top: 34, bottom: 46 };

const fmt = (v: number): string => v.toFixed(2);

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / (n * step);
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = mult * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12; v += s) {
    ticks.push(Math.abs(v) < 1e-12 ? 0 : v);
  }
  return ticks;
}

const tickLabel = (v: number): string => {
  const s = v.toPrecision(3);
  return String(Number(s));
};

function renderPanel(panel: Panel, x0: number, y0: number): string {
  const xs = panel.lines.flatMap((l) => l.x);
  const ys = panel.lines.flatMap((l, _i) =>
    l.yerr ? l.y.flatMap((v, k) => [v - (l.yerr as number[])[k], v + (l.yerr as number[])[k]]) : l.y,
  );
  const bench = panel.benchmarks;
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  let yLo = panel.yMin ?? Math.min(0, ...ys, ...bench);
  let yHi = panel.yMax ?? Math.max(...ys, ...bench) * 1.08;
  if (!(yHi > yLo)) yHi = yLo + 1;
  const plotW = W - MARGIN.left - MARGIN.right;
  const plotH = H - MARGIN.top - MARGIN.bottom;
  const sx = (v: number): number =>
    x0 + MARGIN.left + (xHi > xLo ? ((v - xLo) / (xHi - xLo)) * plotW : plotW / 2);
  const sy = (v: number): number => y0 + MARGIN.top + (1 - (v - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<rect x="${fmt(x0 + MARGIN.left)}" y="${fmt(y0 + MARGIN.top)}" width="${fmt(plotW)}" ` +
      `height="${fmt(plotH)}" fill="none" stroke="#333333" stroke-width="1"/>`,
  );
  parts.push(
    `<text x="${fmt(x0 + MARGIN.left + plotW / 2)}" y="${fmt(y0 + 20)}" class="title" ` +
      `text-anchor="middle">${panel.title}</text>`,
  );
  for (const t of niceTicks(xLo, xHi)) {
    const px = sx(t);
    parts.push(
      `<line x1="${fmt(px)}" y1="${fmt(y0 + MARGIN.top + plotH)}" x2="${fmt(px)}" ` +
        `y2="${fmt(y0 + MARGIN.top + plotH + 4)}" stroke="#333333"/>`,
      `<text x="${fmt(px)}" y="${fmt(y0 + MARGIN.top + plotH + 17)}" class="tick" ` +
        `text-anchor="middle">${tickLabel(t)}</text>`,
    );
  }
  for (const t of niceTicks(yLo, yHi)) {
    const py = sy(t);
    parts.push(
      `<line x1="${fmt(x0 + MARGIN.left - 4)}" y1="${fmt(py)}" x2="${fmt(x0 + MARGIN.left)}" ` +
        `y2="${fmt(py)}" stroke="#333333"/>`,
      `<text x="${fmt(x0 + MARGIN.left - 7)}" y="${fmt(py + 3.5)}" class="tick" ` +
        `text-anchor="end">${tickLabel(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${fmt(x0 + MARGIN.left + plotW / 2)}" y="${fmt(y0 + H - 10)}" class="axis" ` +
      `text-anchor="middle">${panel.xLabel}</text>`,
    `<text x="${fmt(x0 + 14)}" y="${fmt(y0 + MARGIN.top + plotH / 2)}" class="axis" ` +
      `text-anchor="middle" transform="rotate(-90 ${fmt(x0 + 14)} ${fmt(
        y0 + MARGIN.top + plotH / 2,
      )})">${panel.yLabel}</text>`,
  );
  for (const b of panel.benchmarks) {
    if (b < yLo || b > yHi) continue;
    parts.push(
      `<line x1="${fmt(sx(xLo))}" y1="${fmt(sy(b))}" x2="${fmt(sx(xHi))}" y2="${fmt(sy(b))}" ` +
        `stroke="#444444" stroke-width="1" stroke-dasharray="6,4" class="benchmark" ` +
        `data-benchmark="${b}"/>`,
    );
  }
  panel.lines.forEach((line, li) => {
    const color = line.color ?? PALETTE[li % PALETTE.length];
    const points = line.x.map((v, k) => `${fmt(sx(v))},${fmt(sy(line.y[k]))}`);
    parts.push(
      `<polyline points="${points.join(" ")}" fill="none" stroke="${color}" ` +
        `stroke-width="1.5" class="series" data-series="${line.label}"/>`,
    );
    if (panel.markers ?? line.x.length <= 24) {
      line.x.forEach((v, k) => {
        parts.push(
          `<circle cx="${fmt(sx(v))}" cy="${fmt(sy(line.y[k]))}" r="2.5" fill="${color}"/>`,
        );
      });
    }
    if (line.yerr) {
      line.x.forEach((v, k) => {
        const e = (line.yerr as number[])[k];
        const px = sx(v);
        const yTop = sy(line.y[k] + e);
        const yBot = sy(line.y[k] - e);
        parts.push(
          `<line x1="${fmt(px)}" y1="${fmt(yBot)}" x2="${fmt(px)}" y2="${fmt(yTop)}" ` +
            `stroke="${color}" stroke-width="1" class="errorbar"/>`,
          `<line x1="${fmt(px - 3)}" y1="${fmt(yTop)}" x2="${fmt(px + 3)}" y2="${fmt(yTop)}" ` +
            `stroke="${color}" stroke-width="1" class="errorbar-cap"/>`,
          `<line x1="${fmt(px - 3)}" y1="${fmt(yBot)}" x2="${fmt(px + 3)}" y2="${fmt(yBot)}" ` +
            `stroke="${color}" stroke-width="1" class="errorbar-cap"/>`,
        );
      });
    }
    // legend entry
    const lx = x0 + MARGIN.left + 8;
    const ly = y0 + MARGIN.top + 14 + 14 * li;
    parts.push(
      `<line x1="${fmt(lx)}" y1="${fmt(ly - 3)}" x2="${fmt(lx + 16)}" y2="${fmt(ly - 3)}" ` +
        `stroke="${color}" stroke-width="1.5"/>`,
      `<text x="${fmt(lx + 20)}" y="${fmt(ly)}" class="legend">${line.label}</text>`,
    );
  });
  return parts.join("\n");
}

export function renderFigure(panels: Panel[], columns: number): string {
  const rows = Math.ceil(panels.length / columns);
  const width = columns * W;
  const height = rows * H;
  const body = panels
    .map((panel, k) => renderPanel(panel, (k % columns) * W, Math.floor(k / columns) * H))
    .join("\n");
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}">`,
    "<style>",
    "text { font-family: Helvetica, Arial, sans-serif; fill: #111111; }",
    ".title { font-size: 13px; } .axis { font-size: 12px; }",
    ".tick { font-size: 10px; } .legend { font-size: 10px; }",
    "</style>",
    `<rect width="${width}" height="${height}" fill="#ffffff"/>`,
    body,
    "</svg>",
    "",
  ].join("\n");
}
