// Interactive labeling queue: one card at a time, digits 1..C answer it.

import { ApiClient } from "./api.js";
import { buildStrip } from "./heatstrip.js";
import { handleLabelKey } from "./keyboard.js";
import { loadQueue, SessionQueue } from "./queue.js";
import { ApiError, PendingQuery } from "./types.js";

export interface SessionViewOptions {
  pollMs?: number; // how often to look for the next round's session
}

export class SessionView {
  private queue: SessionQueue | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private keyHandler: (e: KeyboardEvent) => void;
  private stopped = false;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private experiment: string,
    private opts: SessionViewOptions = {},
  ) {
    this.keyHandler = (e: KeyboardEvent) => {
      const snap = this.queue?.snapshot();
      if (!snap || !snap.current) return;
      const label = handleLabelKey(e, snap.current.class_names.length);
      if (label !== null) {
        e.preventDefault();
        void this.submit(label);
      }
    };
  }

  start(): void {
    this.root.ownerDocument.addEventListener("keydown", this.keyHandler);
    void this.poll();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.root.ownerDocument.removeEventListener("keydown", this.keyHandler);
  }

  private schedule(): void {
    if (this.stopped) return;
    this.timer = setTimeout(() => void this.poll(), this.opts.pollMs ?? 1500);
  }

  /** Look for an open session; render it or show the waiting state. */
  async poll(): Promise<void> {
    if (this.stopped) return;
    try {
      this.queue = await loadQueue(this.api, this.experiment);
      this.render();
      if (this.queue.snapshot().finished) this.schedule();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // between rounds: the loop is training or the run is over
        this.renderWaiting();
        this.schedule();
      } else {
        this.renderError(err instanceof Error ? err.message : String(err));
        this.schedule();
      }
    }
  }

  private async submit(label: number): Promise<void> {
    if (!this.queue) return;
    const snap = await this.queue.submit(label);
    if (snap.needsResync) await this.queue.resync();
    this.render();
    if (this.queue.snapshot().finished) this.schedule();
  }

  private clear(): HTMLElement {
    this.root.textContent = "";
    return this.root;
  }

  private renderWaiting(): void {
    const el = this.clear();
    const p = el.ownerDocument.createElement("p");
    p.className = "muted";
    p.textContent = "no pending queries: the loop is training or finished";
    el.appendChild(p);
  }

  private renderError(message: string): void {
    const el = this.clear();
    const p = el.ownerDocument.createElement("p");
    p.className = "error";
    p.textContent = message;
    el.appendChild(p);
  }

  render(): void {
    if (!this.queue) return;
    const snap = this.queue.snapshot();
    const doc = this.root.ownerDocument;
    const el = this.clear();

    const progress = doc.createElement("div");
    progress.className = "progress";
    progress.textContent = `${snap.done}/${snap.total}`;
    el.appendChild(progress);

    if (snap.error) {
      const err = doc.createElement("p");
      err.className = "error";
      err.textContent = snap.error;
      el.appendChild(err);
    }

    if (!snap.current) {
      const done = doc.createElement("p");
      done.className = "muted";
      done.textContent = "session complete, waiting for the next round";
      el.appendChild(done);
      return;
    }
    el.appendChild(this.card(snap.current));
  }

  private card(q: PendingQuery): HTMLElement {
    const doc = this.root.ownerDocument;
    const card = doc.createElement("div");
    card.className = "card";

    const title = doc.createElement("h3");
    title.textContent = `${q.video} @ frame ${q.frame}`;
    card.appendChild(title);

    const span = doc.createElement("p");
    span.className = "muted";
    span.textContent = `clip ${q.lo}..${q.hi}, label the center frame only`;
    card.appendChild(span);

    const strip = buildStrip(q.context, q.frame, q.lo);
    if (strip) {
      const row = doc.createElement("div");
      row.className = "strip";
      strip.colors.forEach((color, i) => {
        const cell = doc.createElement("div");
        cell.className = i === strip.centerIndex ? "cell center" : "cell";
        cell.style.background = color;
        row.appendChild(cell);
      });
      card.appendChild(row);
    }

    const picker = doc.createElement("div");
    picker.className = "picker";
    q.class_names.forEach((name, i) => {
      const btn = doc.createElement("button");
      btn.textContent = `${i + 1} ${name}`;
      btn.addEventListener("click", () => void this.submit(i));
      picker.appendChild(btn);
    });
    card.appendChild(picker);

    const hint = doc.createElement("p");
    hint.className = "muted";
    hint.textContent = `keys 1..${q.class_names.length} label and advance`;
    card.appendChild(hint);
    return card;
  }
}
