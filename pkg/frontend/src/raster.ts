/** 8-connected line rasterization matching the server's reveal semantics:
 * one step along the major axis per cell, minor axis rounded to nearest
 * with ties away from zero. Used to predict which cells a click reveals. */

export interface Cell {
  row: number;
  col: number;
}

function roundFrac(p: number, q: number): number {
  if (p >= 0) return Math.floor((2 * p + q) / (2 * q));
  return -Math.floor((2 * -p + q) / (2 * q));
}

export function rasterLine(a: Cell, b: Cell): Cell[] {
  const dr = b.row - a.row;
  const dc = b.col - a.col;
  const n = Math.max(Math.abs(dr), Math.abs(dc));
  if (n === 0) return [{ row: a.row, col: a.col }];
  const cells: Cell[] = [];
  for (let i = 0; i <= n; i++) {
    cells.push({
      row: a.row + roundFrac(i * dr, n),
      col: a.col + roundFrac(i * dc, n),
    });
  }
  return cells;
}

export function cellKey(cell: Cell): string {
  return `${cell.row},${cell.col}`;
}

/** Cells a waypoint click should newly reveal, in path order: the leg from
 * the last waypoint (exclusive) to the target, skipping already-revealed
 * cells, cut off when the budget runs out. */
export function expectedReveals(
  lastWaypoint: Cell | null,
  target: Cell,
  revealed: ReadonlySet<string>,
  remaining: number,
): Cell[] {
  const path =
    lastWaypoint === null ? [target] : rasterLine(lastWaypoint, target).slice(1);
  const out: Cell[] = [];
  for (const cell of path) {
    if (revealed.has(cellKey(cell)) || out.some((c) => cellKey(c) === cellKey(cell))) {
      continue;
    }
    if (out.length >= remaining) break;
    out.push(cell);
  }
  return out;
}
