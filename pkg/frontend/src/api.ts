/** Typed client for the session service. The UI talks to the grid only
 * through this API; unrevealed values never reach the browser. */

export interface ScenarioInfo {
  name: string;
  rows: number;
  cols: number;
}

export interface RevealedCell {
  row: number;
  col: number;
  value: number;
}

export interface MaskedView {
  rows: number;
  cols: number;
  cell_m: number;
  revealed: RevealedCell[];
  remaining: number;
  budget_total: number;
  value_range: [number, number];
  finished: boolean;
}

export interface RevealResult {
  newly_revealed: RevealedCell[];
  truncated: boolean;
  remaining: number;
}

export interface CreateSessionResponse {
  session_id: string;
  masked_view: MaskedView;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parse<T>(response: Response): Promise<T> {
  const body = await response.json();
  if (!response.ok) {
    throw new ApiError(
      response.status,
      body?.error_code ?? "unknown",
      body?.message ?? response.statusText,
    );
  }
  return body as T;
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async health(): Promise<boolean> {
    try {
      const response = await fetch(this.url("/api/health"));
      return response.ok;
    } catch {
      return false;
    }
  }

  async listScenarios(): Promise<ScenarioInfo[]> {
    return parse(await fetch(this.url("/api/scenarios")));
  }

  async createSession(
    scenarioName: string,
    budgetTotal?: number,
  ): Promise<CreateSessionResponse> {
    return parse(
      await fetch(this.url("/api/sessions"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({
          scenario_name: scenarioName,
          agent: "human",
          ...(budgetTotal === undefined ? {} : { budget_total: budgetTotal }),
        }),
      }),
    );
  }

  async getSession(sessionId: string): Promise<MaskedView> {
    return parse(await fetch(this.url(`/api/sessions/${sessionId}`)));
  }

  /** Posts one waypoint. The dedupe token makes network retries
   * idempotent: the service replays the cached result instead of
   * spending budget twice. */
  async postWaypoint(
    sessionId: string,
    row: number,
    col: number,
    token: string,
    attempts = 3,
  ): Promise<RevealResult> {
    let lastError: unknown;
    for (let attempt = 0; attempt < attempts; attempt++) {
      try {
        return await parse<RevealResult>(
          await fetch(this.url(`/api/sessions/${sessionId}/waypoints`), {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ row, col, token }),
          }),
        );
      } catch (err) {
        if (err instanceof ApiError) throw err; // real rejection, not network
        lastError = err;
      }
    }
    throw lastError;
  }

  async finish(sessionId: string, note: string): Promise<void> {
    await parse(
      await fetch(this.url(`/api/sessions/${sessionId}/finish`), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ note }),
      }),
    );
  }
}
