// Correlation heatmap: (byte x property) |r| matrix from the findings table.
// Clicking a heatmap column selects the byte in the hex grid.

import { CorrelationFindingMessage } from "./protocol.js";

export interface Heatmap {
  bytes: number[]; // ascending, only bytes with at least one finding
  props: string[]; // "Category.prop" row keys, sorted
  cells: Map<string, number>; // "byte:prop" -> |r|
}

export function cellKey(byte: number, prop: string): string {
  return `${byte}:${prop}`;
}

export function buildHeatmap(findings: CorrelationFindingMessage[]): Heatmap {
  const bytes = new Set<number>();
  const props = new Set<string>();
  const cells = new Map<string, number>();
  for (const f of findings) {
    const prop = `${f.category}.${f.prop}`;
    bytes.add(f.byte);
    props.add(prop);
    const key = cellKey(f.byte, prop);
    const r = Math.abs(f.r);
    if ((cells.get(key) ?? 0) < r) cells.set(key, r);
  }
  return {
    bytes: [...bytes].sort((a, b) => a - b),
    props: [...props].sort(),
    cells,
  };
}
