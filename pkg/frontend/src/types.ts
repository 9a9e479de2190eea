// Wire types, mirroring the annotation service JSON exactly.

export interface PendingQuery {
  session: string;
  video: string;
  frame: number;
  lo: number;
  hi: number;
  class_names: string[];
  context: number[][] | null;
}

export interface SessionInfo {
  session: string;
  pending: number;
}

export interface SubmitResult {
  ok: boolean;
  remaining: number;
}

export interface MetricFields {
  acc: number;
  edit: number;
  [key: string]: unknown; // f1_10, precision_25, per_class, ...
}

export interface RoundRow {
  round: number;
  labeled_before: number;
  labeled_after: number;
  queried_videos: string[];
  queries: Record<string, unknown>[];
  report: MetricFields;
  stop_reason: string | null;
}

export interface HistoryDoc {
  schema_version: number;
  config?: Record<string, unknown>;
  rounds: RoundRow[];
  error?: string | null;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    public detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}
