// 16x8 RAM hex grid model: cell layout, hex formatting, change flashes.

export const GRID_COLS = 16;
export const GRID_ROWS = 8;

export interface HexCell {
  addr: number;
  row: number;
  col: number;
  hex: string;
  changed: boolean;
  selected: boolean;
}

export function toHex(value: number): string {
  return value.toString(16).toUpperCase().padStart(2, "0");
}

export function cellAddr(row: number, col: number): number {
  return row * GRID_COLS + col;
}

export function buildGrid(ram: number[], changed: Set<number>,
                          selected: number | null): HexCell[] {
  const cells: HexCell[] = [];
  for (let row = 0; row < GRID_ROWS; row++) {
    for (let col = 0; col < GRID_COLS; col++) {
      const addr = cellAddr(row, col);
      cells.push({
        addr,
        row,
        col,
        hex: toHex(ram[addr]),
        changed: changed.has(addr),
        selected: addr === selected,
      });
    }
  }
  return cells;
}
