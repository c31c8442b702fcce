// Typed client for the session API. Every failure mode the UI must react
// to gets its own error class: stale revision (reload prompt), invalid
// pivots (inline message), anything network-ish (retry banner).

import type {
  DeviationResponse,
  PivotPayload,
  PosteriorResponse,
  Report,
  RefitResult,
  SessionInfo,
} from "./types.js";

export class ConflictError extends Error {
  constructor(public currentRevision: number) {
    super(`session was changed elsewhere; server is at revision ${currentRevision}`);
  }
}

export class PivotValidationError extends Error {
  constructor(public pivotIndex: number | null, message: string) {
    super(message);
  }
}

export class ServiceUnreachableError extends Error {
  constructor(cause: unknown) {
    super(`service unreachable: ${cause instanceof Error ? cause.message : String(cause)}`);
  }
}

async function request(url: string, init?: RequestInit): Promise<Response> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (cause) {
    throw new ServiceUnreachableError(cause);
  }
  if (response.status >= 500) {
    throw new ServiceUnreachableError(`HTTP ${response.status}`);
  }
  return response;
}

async function errorDetail(response: Response): Promise<unknown> {
  try {
    return (await response.json()).detail;
  } catch {
    return response.statusText;
  }
}

export class ApiClient {
  constructor(public baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async createSession(dataset: string): Promise<SessionInfo> {
    const response = await request(this.url("/sessions"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ dataset }),
    });
    if (!response.ok) {
      throw new Error(`create session failed: ${JSON.stringify(await errorDetail(response))}`);
    }
    return response.json();
  }

  async listDatasets(): Promise<string[]> {
    const response = await request(this.url("/datasets"));
    if (!response.ok) throw new Error("dataset listing failed");
    return (await response.json()).datasets;
  }

  async getDeviation(sessionId: string): Promise<DeviationResponse> {
    const response = await request(this.url(`/sessions/${sessionId}/deviation`));
    if (!response.ok) {
      throw new Error(`deviation fetch failed: ${JSON.stringify(await errorDetail(response))}`);
    }
    return response.json();
  }

  async getPivots(sessionId: string): Promise<{ revision: number; pivots: PivotPayload[] }> {
    const response = await request(this.url(`/sessions/${sessionId}/pivots`));
    if (!response.ok) {
      throw new Error(`pivot fetch failed: ${JSON.stringify(await errorDetail(response))}`);
    }
    return response.json();
  }

  async putPivots(
    sessionId: string,
    pivots: PivotPayload[],
    expectedRevision: number,
  ): Promise<number> {
    const response = await request(this.url(`/sessions/${sessionId}/pivots`), {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ pivots, expected_revision: expectedRevision }),
    });
    if (response.status === 409) {
      const detail = (await errorDetail(response)) as { revision: number };
      throw new ConflictError(detail.revision);
    }
    if (response.status === 422) {
      const detail = (await errorDetail(response)) as Array<{ loc: unknown[]; msg: string }>;
      const first = Array.isArray(detail) ? detail[0] : null;
      const last = first?.loc ? first.loc[first.loc.length - 1] : null;
      const index = typeof last === "number" ? last : null;
      throw new PivotValidationError(index, first ? first.msg : "invalid pivots");
    }
    if (!response.ok) {
      throw new Error(`pivot submit failed: ${JSON.stringify(await errorDetail(response))}`);
    }
    return (await response.json()).revision;
  }

  async refit(sessionId: string, options: Record<string, unknown> = {}): Promise<RefitResult> {
    const response = await request(this.url(`/sessions/${sessionId}/refit`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(options),
    });
    if (response.status === 409) {
      const detail = (await errorDetail(response)) as { revision: number };
      throw new ConflictError(detail.revision);
    }
    if (!response.ok) {
      throw new Error(`refit failed: ${JSON.stringify(await errorDetail(response))}`);
    }
    const revision = Number(response.headers.get("X-Session-Revision") ?? "-1");
    return { report: await response.json(), revision };
  }

  async getPosterior(sessionId: string): Promise<PosteriorResponse | null> {
    const response = await request(this.url(`/sessions/${sessionId}/posterior`));
    if (response.status === 404) return null; // nothing sampled yet
    if (!response.ok) {
      throw new Error(`posterior fetch failed: ${JSON.stringify(await errorDetail(response))}`);
    }
    return response.json();
  }
}
