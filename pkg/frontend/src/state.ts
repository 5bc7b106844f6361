/**
 * Session state mirror and the render scheduler.
 *
 * The store only changes after an acknowledged service mutation (single
 * source of truth). The scheduler keeps at most one render in flight,
 * coalesces bursts to the newest request, and discards stale responses by
 * token: a response is shown only if no newer request was issued since.
 */

import { ApiError, Coefficients, OverrideEntry, SessionApi, SessionState } from "./api";

export interface RenderLogEntry {
  token: number;
  frame: number;
  applied: boolean;
}

export type Listener = () => void;

export class SessionStore {
  state: SessionState | null = null;
  frameIndex = 0;
  lastError: { message: string; field?: string } | null = null;
  previewBytes: Uint8Array | null = null;
  previewToken = 0;
  /** Applied-render log; tokens must be strictly increasing. */
  renderLog: RenderLogEntry[] = [];

  private listeners: Listener[] = [];
  private nextToken = 1;
  private inFlight = false;
  private pending: { token: number; frame: number } | null = null;

  constructor(
    readonly api: SessionApi,
    readonly sessionId: string,
  ) {}

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  async refresh(): Promise<void> {
    this.state = await this.api.getState(this.sessionId);
    this.emit();
  }

  get coefficients(): Coefficients {
    if (!this.state) throw new Error("session state not loaded");
    return this.state.coefficients;
  }

  get overrides(): OverrideEntry[] {
    return this.state?.overrides ?? [];
  }

  /** PATCH coefficients; the store adopts the acknowledged values only. */
  async patchCoefficients(patch: Partial<Coefficients>): Promise<boolean> {
    try {
      const resp = await this.api.patchParams(this.sessionId, patch);
      if (this.state) this.state.coefficients = resp.coefficients;
      this.lastError = null;
      this.emit();
      this.requestRender(this.frameIndex);
      return true;
    } catch (err) {
      if (err instanceof ApiError) {
        this.lastError = { message: err.body.message, field: err.body.field };
        this.emit();
        return false;
      }
      throw err;
    }
  }

  async setOverride(layer: number, channel: number, value: number | null): Promise<boolean> {
    try {
      const resp = await this.api.putOverride(this.sessionId, layer, channel, value);
      if (this.state) this.state.overrides = resp.overrides;
      this.lastError = null;
      this.emit();
      this.requestRender(this.frameIndex);
      return true;
    } catch (err) {
      if (err instanceof ApiError) {
        this.lastError = { message: err.body.message, field: err.body.field };
        this.emit();
        return false;
      }
      throw err;
    }
  }

  setFrame(index: number): void {
    if (!this.state) return;
    const clamped = Math.max(0, Math.min(index, this.state.frame_count - 1));
    this.frameIndex = clamped;
    this.emit();
    this.requestRender(clamped);
  }

  /**
   * Schedule a preview render. Bursts collapse to the newest request; a
   * response is displayed only when it is still the latest one issued.
   */
  requestRender(frame: number): number {
    const token = this.nextToken++;
    this.pending = { token, frame };
    void this.pump();
    return token;
  }

  private async pump(): Promise<void> {
    if (this.inFlight || !this.pending) return;
    const req = this.pending;
    this.pending = null;
    this.inFlight = true;
    try {
      let bytes: Uint8Array | null = null;
      try {
        bytes = await this.api.renderFrame(this.sessionId, req.frame);
      } catch (err) {
        if (err instanceof ApiError && err.isBusy) {
          // the service is rendering for someone else; back off, then retry
          await new Promise((r) => setTimeout(r, err.body.retry_after_ms ?? 50));
          this.pending = this.pending ?? req;
        } else if (err instanceof ApiError) {
          this.lastError = { message: err.body.message, field: err.body.field };
        } else {
          throw err;
        }
      }
      if (bytes) {
        const stale = req.token < this.nextToken - 1 && this.pending !== null;
        if (!stale && req.token > this.previewToken) {
          this.previewBytes = bytes;
          this.previewToken = req.token;
          this.renderLog.push({ token: req.token, frame: req.frame, applied: true });
          this.emit();
        } else {
          this.renderLog.push({ token: req.token, frame: req.frame, applied: false });
        }
      }
    } finally {
      this.inFlight = false;
    }
    if (this.pending) void this.pump();
  }

  /** Resolves once no render is in flight or queued. */
  async idle(): Promise<void> {
    while (this.inFlight || this.pending) {
      await new Promise((resolve) => setTimeout(resolve, 2));
    }
  }
}
