/** Deterministic SVG assembly: fixed canvas, fonts, and ordering. */

export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN = { top: 36, right: 180, bottom: 52, left: 64 };

export const PALETTE = [
  '#4c72b0', '#dd8452', '#55a868', '#c44e52', '#8172b3',
  '#937860', '#da8bc3', '#8c8c8c', '#ccb974', '#64b5cd',
];

const XML_ESCAPES: Record<string, string> = {
  '&': '&amp;', '<': '&lt;', '>': '&gt;', '"': '&quot;', "'": '&apos;',
};

export function escapeXml(text: string): string {
  return text.replace(/[&<>"']/g, (c) => XML_ESCAPES[c]);
}

export function fmt(value: number): string {
  if (!Number.isFinite(value)) throw new Error(`non-finite coordinate: ${value}`);
  return value.toFixed(2).replace(/\.00$/, '').replace(/(\.\d)0$/, '$1');
}

export interface Scale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  scale.range = range;
  return scale;
}

export function ticks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step * 10, step * 5, step * 2, step];
  const chosen = candidates.reverse().find((s) => span / s <= count + 1) ?? step * 10;
  const out: number[] = [];
  for (let v = Math.ceil(lo / chosen) * chosen; v <= hi + 1e-12; v += chosen) {
    out.push(Number(v.toFixed(10)));
  }
  return out;
}

export function polyline(points: Array<[number, number]>, stroke: string, width = 1.8): string {
  const path = points
    .map(([x, y], i) => `${i === 0 ? 'M' : 'L'}${fmt(x)},${fmt(y)}`)
    .join('');
  return `<path d="${path}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`;
}

export function axes(
  xScale: Scale,
  yScale: Scale,
  xLabel: string,
  yLabel: string,
): string {
  const [x0, x1] = xScale.range;
  const [y0, y1] = yScale.range;
  const parts: string[] = [];
  parts.push(
    `<line x1="${fmt(x0)}" y1="${fmt(y0)}" x2="${fmt(x1)}" y2="${fmt(y0)}" stroke="#333" stroke-width="1"/>`,
  );
  parts.push(
    `<line x1="${fmt(x0)}" y1="${fmt(y0)}" x2="${fmt(x0)}" y2="${fmt(y1)}" stroke="#333" stroke-width="1"/>`,
  );
  for (const t of ticks(xScale.domain[0], xScale.domain[1])) {
    const x = xScale(t);
    parts.push(`<line x1="${fmt(x)}" y1="${fmt(y0)}" x2="${fmt(x)}" y2="${fmt(y0 + 5)}" stroke="#333" stroke-width="1"/>`);
    parts.push(
      `<text x="${fmt(x)}" y="${fmt(y0 + 20)}" text-anchor="middle" font-size="12">${fmt(t)}</text>`,
    );
  }
  for (const t of ticks(yScale.domain[0], yScale.domain[1])) {
    const y = yScale(t);
    parts.push(`<line x1="${fmt(x0 - 5)}" y1="${fmt(y)}" x2="${fmt(x0)}" y2="${fmt(y)}" stroke="#333" stroke-width="1"/>`);
    parts.push(
      `<text x="${fmt(x0 - 9)}" y="${fmt(y + 4)}" text-anchor="end" font-size="12">${fmt(t)}</text>`,
    );
  }
  const xMid = (x0 + x1) / 2;
  const yMid = (y0 + y1) / 2;
  parts.push(
    `<text x="${fmt(xMid)}" y="${fmt(y0 + 42)}" text-anchor="middle" font-size="14">${escapeXml(xLabel)}</text>`,
  );
  parts.push(
    `<text x="${fmt(x0 - 48)}" y="${fmt(yMid)}" text-anchor="middle" font-size="14" transform="rotate(-90 ${fmt(x0 - 48)} ${fmt(yMid)})">${escapeXml(yLabel)}</text>`,
  );
  return parts.join('\n');
}

export function legend(labels: string[], x: number, y: number): string {
  const parts: string[] = [];
  labels.forEach((label, i) => {
    const yy = y + i * 20;
    const color = PALETTE[i % PALETTE.length];
    parts.push(`<line x1="${fmt(x)}" y1="${fmt(yy)}" x2="${fmt(x + 22)}" y2="${fmt(yy)}" stroke="${color}" stroke-width="2.5"/>`);
    parts.push(
      `<text x="${fmt(x + 28)}" y="${fmt(yy + 4)}" font-size="12">${escapeXml(label)}</text>`,
    );
  });
  return parts.join('\n');
}

export function document(title: string, body: string, width = WIDTH, height = HEIGHT): string {
  return [
    '<?xml version="1.0" encoding="UTF-8"?>',
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${width}" height="${height}" fill="#ffffff"/>`,
    `<text x="${fmt(width / 2)}" y="22" text-anchor="middle" font-size="15">${escapeXml(title)}</text>`,
    body,
    '</svg>',
    '',
  ].join('\n');
}
