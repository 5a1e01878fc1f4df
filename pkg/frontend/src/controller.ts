/**
 * Session controller: polling, optimistic concurrency, idempotent submission.
 *
 * One in-flight submission at a time keyed by (seq, arm, outcome): repeated
 * submit clicks reuse the same idempotency key, so the server records exactly
 * one event. A 409 means our view went stale; the controller reloads the
 * authoritative state and re-renders.
 */

import { ConductClient, ServiceError, SessionView } from "./api.js";

export const POLL_INTERVAL_MS = 2000;

export type IdGenerator = () => string;

export function defaultIdGenerator(): string {
  const bytes = new Uint8Array(16);
  crypto.getRandomValues(bytes);
  return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}

export class SessionController {
  view: SessionView | null = null;
  stale = false;
  private submissionKeys = new Map<string, string>();

  constructor(
    private readonly client: ConductClient,
    private readonly sessionId: string,
    private readonly onChange: (view: SessionView, stale: boolean) => void,
    private readonly idGenerator: IdGenerator = defaultIdGenerator,
  ) {}

  private emit(): void {
    if (this.view) this.onChange(this.view, this.stale);
  }

  private accept(view: SessionView): void {
    this.view = view;
    this.stale = false;
    this.emit();
  }

  async refresh(): Promise<void> {
    this.accept(await this.client.getState(this.sessionId));
  }

  async requestAssignment(): Promise<void> {
    try {
      const response = await this.client.nextAssignment(this.sessionId);
      this.accept(response.view);
    } catch (error) {
      await this.resyncOnConflict(error);
    }
  }

  /**
   * Record an outcome for the pending assignment. The idempotency key is
   * minted once per (seq, arm, outcome) intent, so double-clicks and retries
   * collapse into a single event server-side.
   */
  async submitOutcome(arm: number, outcome: number): Promise<void> {
    if (!this.view) throw new Error("no view loaded");
    const intent = `${this.view.seq}:${arm}:${outcome}`;
    let key = this.submissionKeys.get(intent);
    if (!key) {
      key = this.idGenerator();
      this.submissionKeys.set(intent, key);
    }
    try {
      const view = await this.client.recordOutcome(this.sessionId, arm, outcome, key);
      this.submissionKeys.delete(intent);
      this.accept(view);
    } catch (error) {
      await this.resyncOnConflict(error);
    }
  }

  async loadWhatIf(arm: number, outcomes: number): Promise<SessionView[]> {
    const previews = [];
    for (let outcome = 0; outcome < outcomes; outcome += 1) {
      previews.push(await this.client.whatIf(this.sessionId, arm, outcome));
    }
    return previews;
  }

  async requestRecommendation(): Promise<void> {
    try {
      const response = await this.client.recommendation(this.sessionId);
      this.accept(response.view);
    } catch (error) {
      await this.resyncOnConflict(error);
    }
  }

  /** Poll tick: pull the server view; mark stale when seq advanced elsewhere. */
  async poll(): Promise<void> {
    const latest = await this.client.getState(this.sessionId);
    if (this.view && latest.seq !== this.view.seq) {
      this.stale = true;
      this.emit();
    }
    this.accept(latest);
  }

  private async resyncOnConflict(error: unknown): Promise<void> {
    if (error instanceof ServiceError && error.isConflict) {
      this.stale = true;
      this.emit();
      await this.refresh();
      return;
    }
    throw error;
  }
}
