#!/usr/bin/env node
import { mkdirSync, readFileSync, writeFileSync } from 'fs';
import { dirname, join } from 'path';
import yargs from 'yargs';

import { FIGURES, FigureInputs } from './figures';

interface SpecFile {
  figure: string;
  inputs: FigureInputs;
  out: string;
}

function renderOne(figure: string, inputs: FigureInputs, outPath: string): void {
  const entry = FIGURES[figure];
  if (!entry) {
    throw new Error(`unknown figure "${figure}"; known: ${Object.keys(FIGURES).sort().join(', ')}`);
  }
  const svg = entry.render(inputs);
  mkdirSync(dirname(outPath), { recursive: true });
  writeFileSync(outPath, svg, 'utf8');
  console.log(`wrote ${outPath}`);
}

export function main(argv: string[]): number {
  const args = yargs(argv)
    .usage('figgen --figure NAME --in DIR --out DIR  |  figgen --spec PATH')
    .option('spec', { type: 'string', describe: 'JSON spec: {figure, inputs, out}' })
    .option('figure', { type: 'string', describe: 'figure id (fig1b, figS2, fig5, ...)' })
    .option('in', { type: 'string', describe: 'directory holding the experiment CSVs' })
    .option('out', { type: 'string', describe: 'output directory for the SVG' })
    .help()
    .parseSync();

  try {
    if (args.spec) {
      const spec = JSON.parse(readFileSync(args.spec, 'utf8')) as SpecFile | SpecFile[];
      const specs = Array.isArray(spec) ? spec : [spec];
      for (const s of specs) {
        renderOne(s.figure, s.inputs, s.out);
      }
      return 0;
    }
    if (!args.figure || !args.in || !args.out) {
      throw new Error('need either --spec PATH or all of --figure, --in, --out');
    }
    const entry = FIGURES[args.figure];
    if (!entry) {
      throw new Error(`unknown figure "${args.figure}"; known: ${Object.keys(FIGURES).sort().join(', ')}`);
    }
    renderOne(args.figure, entry.inputs(args.in), join(args.out, `${args.figure}.svg`));
    return 0;
  } catch (err) {
    console.error(`figgen: ${(err as Error).message}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
