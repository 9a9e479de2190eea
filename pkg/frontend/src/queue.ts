// One-card-at-a-time session queue. The server is the source of truth:
// every state change here is the echo of an accepted or rejected request.

import { ApiClient } from "./api.js";
import { ApiError, PendingQuery } from "./types.js";

export interface QueueSnapshot {
  current: PendingQuery | null;
  done: number;
  total: number;
  remaining: number;
  finished: boolean;
  busy: boolean;
  error: string | null;
  needsResync: boolean;
}

export class SessionQueue {
  private cards: PendingQuery[];
  private total: number;
  private done = 0;
  private busy = false;
  private error: string | null = null;
  private needsResync = false;

  constructor(
    private api: ApiClient,
    private sessionId: string,
    pending: PendingQuery[],
  ) {
    this.cards = [...pending];
    this.total = pending.length;
  }

  get session(): string {
    return this.sessionId;
  }

  snapshot(): QueueSnapshot {
    return {
      current: this.cards[0] ?? null,
      done: this.done,
      total: this.total,
      remaining: this.cards.length,
      finished: this.cards.length === 0,
      busy: this.busy,
      error: this.error,
      needsResync: this.needsResync,
    };
  }

  /** Submit a label for the current card. Resolves to the new snapshot. */
  async submit(label: number): Promise<QueueSnapshot> {
    const card = this.cards[0];
    if (!card || this.busy) return this.snapshot();
    this.busy = true;
    try {
      await this.api.submitLabel(this.sessionId, card.video, card.frame, label);
      this.done += 1;
      this.cards.shift();
      this.error = null;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // duplicate or stale card: someone already answered it; do not
        // count it as ours, let the server tell us what is really left
        this.error = `rejected (${err.status}): ${err.detail}`;
        this.needsResync = true;
      } else {
        // network or validation trouble: keep the card, surface the message
        this.error = err instanceof Error ? err.message : String(err);
      }
    } finally {
      this.busy = false;
    }
    return this.snapshot();
  }

  /** Replace the outstanding cards with the server's view of the session. */
  async resync(): Promise<QueueSnapshot> {
    const res = await this.api.pending(this.sessionId);
    this.cards = [...res.pending];
    this.done = Math.max(this.total - this.cards.length, 0);
    this.needsResync = false;
    return this.snapshot();
  }
}

/** Open (or rejoin) the current round's session and load its queue. */
export async function loadQueue(api: ApiClient, experiment: string): Promise<SessionQueue> {
  const info = await api.openSession(experiment);
  const res = await api.pending(info.session);
  return new SessionQueue(api, info.session, res.pending);
}
