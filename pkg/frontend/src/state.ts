/** Session state store and the pure render model.
 *
 * All UI behavior lives here as plain data transitions so it can be tested
 * without a DOM; ui.ts only applies the computed render model. Rendering
 * colors exactly the cells present in the revealed map; everything else
 * stays the overlay color. No score or model feedback exists anywhere.
 */

import type { MaskedView, RevealResult } from "./api.js";
import { colorFor, OVERLAY_COLOR } from "./colormap.js";
import { cellKey } from "./raster.js";

export type Phase = "instructions" | "sampling" | "finished";

export const TASK_TEXT =
  "Guide the robot by clicking waypoint squares. The data along the path " +
  "to each waypoint is revealed as the robot traverses it. Collect data " +
  "so that the best possible model of the underlying field can be " +
  "created. The number of squares that can be revealed is limited; there " +
  "is no time limit.";

export const NOTE_PROMPT =
  "Describe your strategy when choosing waypoints, if you had one.";

export interface UiState {
  phase: Phase;
  sessionId: string | null;
  rows: number;
  cols: number;
  revealed: Map<string, number>;
  waypoints: Array<{ row: number; col: number }>;
  remaining: number;
  budgetTotal: number;
  valueRange: [number, number];
  busy: boolean; // a waypoint post is in flight; clicks disabled
  notice: string | null;
}

export function initialState(): UiState {
  return {
    phase: "instructions",
    sessionId: null,
    rows: 0,
    cols: 0,
    revealed: new Map(),
    waypoints: [],
    remaining: 0,
    budgetTotal: 0,
    valueRange: [0, 20],
    busy: false,
    notice: null,
  };
}

export function sessionStarted(
  state: UiState,
  sessionId: string,
  view: MaskedView,
): UiState {
  const revealed = new Map<string, number>();
  for (const cell of view.revealed) {
    revealed.set(cellKey(cell), cell.value);
  }
  return {
    ...state,
    phase: "sampling",
    sessionId,
    rows: view.rows,
    cols: view.cols,
    revealed,
    waypoints: [],
    remaining: view.remaining,
    budgetTotal: view.budget_total,
    valueRange: view.value_range,
    busy: false,
    notice: null,
  };
}

export function waypointPosted(state: UiState): UiState {
  return { ...state, busy: true, notice: null };
}

export function revealApplied(
  state: UiState,
  target: { row: number; col: number },
  result: RevealResult,
): UiState {
  const revealed = new Map(state.revealed);
  for (const cell of result.newly_revealed) {
    revealed.set(cellKey(cell), cell.value);
  }
  const finished = result.remaining === 0 || result.truncated;
  return {
    ...state,
    revealed,
    waypoints: [...state.waypoints, target],
    remaining: result.remaining,
    busy: false,
    phase: finished ? "finished" : "sampling",
  };
}

export function requestFailed(state: UiState, message: string): UiState {
  return { ...state, busy: false, notice: message };
}

export interface CellRender {
  row: number;
  col: number;
  color: string;
  revealed: boolean;
}

export interface RenderModel {
  phase: Phase;
  taskText: string;
  cells: CellRender[];
  counterText: string;
  colorbar: Array<{ value: number; color: string }>;
  notePrompt: string;
  notice: string | null;
  clicksEnabled: boolean;
}

export function renderModel(state: UiState): RenderModel {
  const [lo, hi] = state.valueRange;
  const cells: CellRender[] = [];
  for (let row = 0; row < state.rows; row++) {
    for (let col = 0; col < state.cols; col++) {
      const value = state.revealed.get(`${row},${col}`);
      cells.push({
        row,
        col,
        color: value === undefined ? OVERLAY_COLOR : colorFor(value, lo, hi),
        revealed: value !== undefined,
      });
    }
  }
  const ticks = 9;
  const colorbar = Array.from({ length: ticks }, (_, i) => {
    const value = lo + ((hi - lo) * i) / (ticks - 1);
    return { value, color: colorFor(value, lo, hi) };
  });
  return {
    phase: state.phase,
    taskText: TASK_TEXT,
    cells,
    counterText:
      `squares revealed: ${state.revealed.size} / ` +
      `squares remaining: ${state.remaining}`,
    colorbar,
    notePrompt: NOTE_PROMPT,
    notice: state.notice,
    clicksEnabled: state.phase === "sampling" && !state.busy,
  };
}
