// Thin typed client over the annotation service; one base-URL setting.
// All server mutation goes through submitLabel, nothing else writes.

import { ApiError, HistoryDoc, PendingQuery, SessionInfo, SubmitResult } from "./types.js";

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = fetch,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await res.json().catch(() => ({}));
    if (!res.ok) {
      const p = payload as { error?: string; detail?: string };
      throw new ApiError(res.status, p.error ?? "error", p.detail ?? res.statusText);
    }
    return payload as T;
  }

  openSession(experiment: string): Promise<SessionInfo> {
    return this.request("POST", "/sessions", { experiment });
  }

  pending(session: string): Promise<{ session: string; pending: PendingQuery[] }> {
    return this.request("GET", `/sessions/${encodeURIComponent(session)}/pending`);
  }

  submitLabel(session: string, video: string, frame: number, label: number): Promise<SubmitResult> {
    return this.request("POST", `/sessions/${encodeURIComponent(session)}/labels`, {
      video,
      frame,
      label,
    });
  }

  cancel(session: string): Promise<{ ok: boolean; dropped: number }> {
    return this.request("POST", `/sessions/${encodeURIComponent(session)}/cancel`);
  }

  history(experiment: string): Promise<HistoryDoc> {
    return this.request("GET", `/experiments/${encodeURIComponent(experiment)}/history`);
  }

  classes(): Promise<{ classes: string[] }> {
    return this.request("GET", "/classes");
  }
}
