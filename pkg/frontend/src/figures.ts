import { numericColumn, readCsv, requireColumns, Table } from './csv';
import {
  HEIGHT,
  MARGIN,
  PALETTE,
  WIDTH,
  axes,
  document as svgDocument,
  escapeXml,
  fmt,
  legend,
  linearScale,
  polyline,
} from './svg';

export interface FigureInputs {
  trajectory?: string;
  summary?: string;
  simplex?: string;
}

export type Renderer = (inputs: FigureInputs) => string;

function plotArea() {
  const x: [number, number] = [MARGIN.left, WIDTH - MARGIN.right];
  const y: [number, number] = [HEIGHT - MARGIN.bottom, MARGIN.top];
  return { x, y };
}

/** Probability-evolution line chart: one curve per tracked outcome. */
export function renderTrajectory(inputs: FigureInputs, title: string): string {
  if (!inputs.trajectory) throw new Error('trajectory figure needs a trajectory CSV (--in DIR)');
  const table = readCsv(inputs.trajectory);
  requireColumns(table, ['t', 'norm'], 'trajectory');
  const seriesNames = table.columns.filter((c) => c !== 't' && c !== 'norm');
  if (seriesNames.length === 0) {
    throw new Error('trajectory: no tracked-outcome columns between "t" and "norm"');
  }
  const t = numericColumn(table, 't');
  const area = plotArea();
  const xScale = linearScale([Math.min(...t), Math.max(...t)], area.x);
  let pMax = 0;
  const series = seriesNames.map((name) => {
    const values = numericColumn(table, name);
    pMax = Math.max(pMax, ...values);
    return { name, values };
  });
  const yScale = linearScale([0, Math.max(pMax * 1.05, 1e-6)], area.y);
  const body: string[] = [];
  body.push(axes(xScale, yScale, 'evolution time t', 'probability'));
  series.forEach(({ values }, i) => {
    const pts = t.map((tv, k) => [xScale(tv), yScale(values[k])] as [number, number]);
    body.push(polyline(pts, PALETTE[i % PALETTE.length]));
  });
  body.push(legend(seriesNames, WIDTH - MARGIN.right + 12, MARGIN.top + 10));
  return svgDocument(title, body.join('\n'));
}

/** Sweep curves: success, per-solution probabilities, spread, total. */
export function renderSweep(inputs: FigureInputs, title: string): string {
  if (!inputs.summary) throw new Error('sweep figure needs a summary CSV (--in DIR)');
  const table = readCsv(inputs.summary);
  const axis = table.columns[0];
  requireColumns(table, [axis, 'success', 'std_dev', 'total_probability'], 'sweep');
  const xs = numericColumn(table, axis);
  const curveNames = table.columns.filter((c) => c !== axis && c !== 'bias');
  const area = plotArea();
  const xScale = linearScale([Math.min(...xs), Math.max(...xs)], area.x);
  const yScale = linearScale([0, 1.05], area.y);
  const body: string[] = [];
  body.push(axes(xScale, yScale, axis, 'probability'));
  curveNames.forEach((name, i) => {
    const values = numericColumn(table, name);
    const pts = xs.map((x, k) => [xScale(x), yScale(values[k])] as [number, number]);
    const color = PALETTE[i % PALETTE.length];
    body.push(polyline(pts, color));
    for (const [px, py] of pts) {
      body.push(`<circle cx="${fmt(px)}" cy="${fmt(py)}" r="3" fill="${color}"/>`);
    }
  });
  body.push(legend(curveNames, WIDTH - MARGIN.right + 12, MARGIN.top + 10));
  return svgDocument(title, body.join('\n'));
}

interface SimplexFrame {
  label: string;
  points: Array<[number, number, number]>; // barycentric weights
}

function barycentric(u: number, v: number, w: number): [number, number] {
  // equilateral triangle with unit side, origin at the left corner
  const total = u + v + w;
  const a = total > 0 ? u / total : 1 / 3;
  const c = total > 0 ? w / total : 1 / 3;
  return [c + a * 0.5, a * Math.sin(Math.PI / 3)];
}

/** Ternary heatmaps of squared-quadrature samples at the captured frames. */
export function renderSimplex(inputs: FigureInputs, title: string): string {
  if (!inputs.simplex) throw new Error('simplex figure needs a simplex-samples CSV (--in DIR)');
  const table = readCsv(inputs.simplex);
  requireColumns(table, ['frame', 't', 'x1', 'x2', 'x3'], 'simplex');
  const frames = new Map<string, SimplexFrame>();
  for (const row of table.rows) {
    const key = row.frame;
    if (!frames.has(key)) {
      frames.set(key, { label: `t = ${Number(row.t)}`, points: [] });
    }
    const xs = [Number(row.x1), Number(row.x2), Number(row.x3)];
    if (xs.some((v) => !Number.isFinite(v))) {
      throw new Error('simplex: non-numeric sample row');
    }
    const sq = xs.map((v) => v * v) as [number, number, number];
    frames.get(key)!.points.push(sq);
  }
  const ordered = [...frames.entries()].sort((a, b) => Number(a[0]) - Number(b[0]));

  const panel = 300;
  const pad = 40;
  const width = ordered.length * panel + pad * 2;
  const height = panel + 90;
  const bins = 24;
  const body: string[] = [];
  ordered.forEach(([, frame], idx) => {
    const ox = pad + idx * panel;
    const oy = 50;
    const side = panel - 50;
    const h = side * Math.sin(Math.PI / 3);
    // accumulate a triangular histogram
    const grid = new Map<string, number>();
    let peak = 0;
    for (const [u, v, w] of frame.points) {
      const [bx, by] = barycentric(u, v, w);
      const i = Math.min(bins - 1, Math.max(0, Math.floor(bx * bins)));
      const j = Math.min(bins - 1, Math.max(0, Math.floor((by / Math.sin(Math.PI / 3)) * bins)));
      const key = `${i}:${j}`;
      const count = (grid.get(key) ?? 0) + 1;
      grid.set(key, count);
      peak = Math.max(peak, count);
    }
    const cell = side / bins;
    const entries = [...grid.entries()].sort();
    for (const [key, count] of entries) {
      const [i, j] = key.split(':').map(Number);
      const alpha = peak > 0 ? count / peak : 0;
      const x = ox + i * cell;
      const y = oy + h - (j + 1) * cell * Math.sin(Math.PI / 3) * (bins / bins);
      body.push(
        `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(cell)}" height="${fmt(cell)}" fill="#c44e52" fill-opacity="${alpha.toFixed(3)}"/>`,
      );
    }
    // triangle outline drawn above the heat cells
    const corners: Array<[number, number]> = [
      [ox, oy + h],
      [ox + side, oy + h],
      [ox + side / 2, oy],
      [ox, oy + h],
    ];
    body.push(polyline(corners, '#333', 1.2));
    const labels = ['x1^2', 'x2^2', 'x3^2'];
    body.push(`<text x="${fmt(ox + side / 2)}" y="${fmt(oy - 10)}" text-anchor="middle" font-size="12">${escapeXml(labels[0])}</text>`);
    body.push(`<text x="${fmt(ox)}" y="${fmt(oy + h + 16)}" text-anchor="middle" font-size="12">${escapeXml(labels[1])}</text>`);
    body.push(`<text x="${fmt(ox + side)}" y="${fmt(oy + h + 16)}" text-anchor="middle" font-size="12">${escapeXml(labels[2])}</text>`);
    body.push(`<text x="${fmt(ox + side / 2)}" y="${fmt(oy + h + 34)}" text-anchor="middle" font-size="13">${escapeXml(frame.label)}</text>`);
  });
  return svgDocument(title, body.join('\n'), width, height);
}

export const FIGURES: Record<string, { inputs: (dir: string) => FigureInputs; render: Renderer }> = {
  fig1b: {
    inputs: (dir) => ({ trajectory: `${dir}/trajectory.csv` }),
    render: (inputs) => renderTrajectory(inputs, 'Probability evolution of the dominant outcomes'),
  },
  fig2: {
    inputs: (dir) => ({ trajectory: `${dir}/trajectory.csv` }),
    render: (inputs) => renderTrajectory(inputs, 'Knapsack: decision-marginal probability evolution'),
  },
  fig3b: {
    inputs: (dir) => ({ trajectory: `${dir}/trajectory.csv` }),
    render: (inputs) => renderTrajectory(inputs, 'Clique search: probability evolution'),
  },
  fig4b: {
    inputs: (dir) => ({ trajectory: `${dir}/trajectory.csv` }),
    render: (inputs) => renderTrajectory(inputs, 'Integer simplex clique search: probability evolution'),
  },
  figS2: {
    inputs: (dir) => ({ summary: `${dir}/summary.csv` }),
    render: (inputs) => renderSweep(inputs, 'Fair-sampling sweep over the momentum offset'),
  },
  figS1: {
    inputs: (dir) => ({ summary: `${dir}/summary.csv` }),
    render: (inputs) => renderSweep(inputs, 'Success probability versus total evolution time'),
  },
  figS4: {
    inputs: (dir) => ({ summary: `${dir}/summary.csv` }),
    render: (inputs) => renderSweep(inputs, 'Click-detector success versus constraint penalty'),
  },
  fig5: {
    inputs: (dir) => ({ simplex: `${dir}/simplex_samples.csv` }),
    render: (inputs) => renderSimplex(inputs, 'Squared-quadrature samples on the simplex'),
  },
};
