/** Controller: wires the API client, the state store, and the DOM.
 * Waypoint posts are strictly sequential; the next click is ignored until
 * the previous reveal acknowledges. */

import { ApiClient, ApiError } from "./api.js";
import {
  initialState,
  renderModel,
  revealApplied,
  requestFailed,
  sessionStarted,
  waypointPosted,
  NOTE_PROMPT,
} from "./state.js";
import { Ui } from "./ui.js";

const api = new ApiClient("");
let state = initialState();

const ui = new Ui(document, {
  onStart: async (scenarioName: string) => {
    try {
      const created = await api.createSession(scenarioName);
      state = sessionStarted(state, created.session_id, created.masked_view);
      ui.apply(renderModel(state));
    } catch (err) {
      state = requestFailed(state, describe(err));
      ui.apply(renderModel(state));
    }
  },
  onCellClick: async (row: number, col: number) => {
    if (state.phase !== "sampling" || state.busy || state.sessionId === null) {
      return;
    }
    const sessionId = state.sessionId;
    state = waypointPosted(state);
    ui.apply(renderModel(state));
    try {
      const token = crypto.randomUUID();
      const result = await api.postWaypoint(sessionId, row, col, token);
      state = revealApplied(state, { row, col }, result);
      ui.apply(renderModel(state), result.newly_revealed);
    } catch (err) {
      // exhausted / invalid-cell rejections surface as notices, not blocks
      state = requestFailed(state, describe(err));
      ui.apply(renderModel(state));
    }
  },
  onFinishNote: async (note: string) => {
    if (state.sessionId === null) return;
    try {
      await api.finish(state.sessionId, note);
    } catch (err) {
      state = requestFailed(state, describe(err));
      ui.apply(renderModel(state));
    }
  },
});

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return `network problem, please retry (${String(err)})`;
}

document.getElementById("note-prompt")!.textContent = NOTE_PROMPT;
ui.apply(renderModel(state));
api.listScenarios().then(
  (scenarios) => ui.setScenarios(scenarios.map((s) => s.name)),
  () => {
    state = requestFailed(state, "could not load scenario list");
    ui.apply(renderModel(state));
  },
);
