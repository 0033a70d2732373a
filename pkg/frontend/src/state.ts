// The one-shot session state machine. Submitting before registering is
// structurally impossible: the submit transition only exists in the
// awaiting-type state, and the polling timer is paused while any request
// is in flight so there is never more than one.

import { GatewayClient, GatewayHttpError, OutcomeView, StatusBody } from "./api.js";

export type UiState =
  | "idle"
  | "registering"
  | "registered"
  | "awaiting-type"
  | "submitting"
  | "computing"
  | "done"
  | "excluded"
  | "error";

export interface Snapshot {
  state: UiState;
  phase: string;
  status: StatusBody | null;
  outcome: OutcomeView | null;
  message: string;
  canSubmit: boolean;
}

export class SessionModel {
  state: UiState = "idle";
  phase = "";
  status: StatusBody | null = null;
  outcome: OutcomeView | null = null;
  message = "";
  token: string | null = null;
  private inFlight = false;
  private listeners: ((snap: Snapshot) => void)[] = [];

  constructor(private client: GatewayClient) {}

  onChange(listener: (snap: Snapshot) => void): void {
    this.listeners.push(listener);
  }

  snapshot(): Snapshot {
    return {
      state: this.state,
      phase: this.phase,
      status: this.status,
      outcome: this.outcome,
      message: this.message,
      canSubmit: this.state === "awaiting-type" && !this.inFlight,
    };
  }

  private emit(): void {
    const snap = this.snapshot();
    for (const fn of this.listeners) fn(snap);
  }

  private fail(err: unknown): void {
    this.message = err instanceof Error ? err.message : String(err);
    this.emit();
  }

  async refreshStatus(): Promise<void> {
    try {
      this.status = await this.client.status();
      this.phase = this.status.phase;
      this.emit();
    } catch (err) {
      this.fail(err);
    }
  }

  async register(credentials: string): Promise<void> {
    if (this.state !== "idle" || this.inFlight) return;
    this.state = "registering";
    this.inFlight = true;
    this.message = "";
    this.emit();
    try {
      const ticket = await this.client.register(credentials);
      this.token = ticket.token;
      this.state = "registered";
    } catch (err) {
      this.state = "idle";
      if (err instanceof GatewayHttpError) {
        this.message = err.detail;
      } else {
        this.message = String(err);
      }
    } finally {
      this.inFlight = false;
    }
    this.emit();
  }

  async submit(typeValue: unknown): Promise<void> {
    if (this.state !== "awaiting-type" || this.inFlight || !this.token) {
      return; // no submit transition anywhere else in the machine
    }
    this.state = "submitting";
    this.inFlight = true;
    this.message = "";
    this.emit();
    try {
      await this.client.submitType(this.token, typeValue);
      this.state = "computing";
    } catch (err) {
      if (err instanceof GatewayHttpError && err.status === 409) {
        // phase moved or a duplicate slipped through: the form stays shut
        this.state = "computing";
        this.message = err.detail;
      } else {
        this.state = "awaiting-type";
        this.message = err instanceof GatewayHttpError ? err.detail : String(err);
      }
    } finally {
      this.inFlight = false;
    }
    this.emit();
  }

  async pollOnce(): Promise<void> {
    if (!this.token || this.inFlight) return; // paused while submitting
    if (this.state === "done" || this.state === "excluded") return;
    try {
      const body = await this.client.poll(this.token);
      this.phase = body.phase;
      if (body.state === "done") {
        this.state = "done";
        this.outcome = body.outcome;
      } else if (body.state === "excluded") {
        this.state = "excluded";
        this.message = body.reason ?? "excluded";
      } else if (body.state === "awaiting-type" && this.state === "registered") {
        this.state = "awaiting-type";
      } else if (body.state === "computing") {
        this.state = "computing";
      }
      this.emit();
    } catch (err) {
      this.fail(err);
    }
  }
}
