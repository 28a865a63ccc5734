import { readFileSync } from 'fs';
import { parse } from 'papaparse';

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

export function readCsv(path: string): Table {
  const text = readFileSync(path, 'utf8');
  const parsed = parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`failed to parse ${path}: ${first.message} (row ${first.row})`);
  }
  const columns = parsed.meta.fields ?? [];
  return { columns, rows: parsed.data };
}

export function numericColumn(table: Table, name: string): number[] {
  if (!table.columns.includes(name)) {
    throw new Error(`missing required column "${name}" (have: ${table.columns.join(', ')})`);
  }
  return table.rows.map((row) => {
    const value = Number(row[name]);
    if (!Number.isFinite(value)) {
      throw new Error(`column "${name}" holds a non-numeric value: ${row[name]}`);
    }
    return value;
  });
}

export function requireColumns(table: Table, names: string[], what: string): void {
  for (const name of names) {
    if (!table.columns.includes(name)) {
      throw new Error(`${what}: missing required column "${name}"`);
    }
  }
}
