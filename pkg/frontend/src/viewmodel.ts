/**
 * Cockpit view model: a pure reduction of the server message stream.
 * No client-side physics; the instruments render exactly what the wire
 * said, and the overlay shows exactly when the tutor says a flag is
 * active.
 */

import type { EndMsg, FeedbackMsg, ServerMsg, StateMsg } from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "closed";

export const STALE_AFTER_MS = 1000;

export class CockpitViewModel {
  status: ConnectionStatus = "connecting";
  state: StateMsg | null = null;
  feedback: FeedbackMsg | null = null;
  end: EndMsg | null = null;
  lastError: string | null = null;
  lastStateAtMs: number | null = null;

  onOpen(): void {
    this.status = "connected";
  }

  onClose(): void {
    this.status = "closed";
  }

  applyMessage(msg: ServerMsg, nowMs: number): void {
    switch (msg.type) {
      case "state":
        this.state = msg;
        this.lastStateAtMs = nowMs;
        break;
      case "feedback":
        this.feedback = msg;
        break;
      case "end":
        this.end = msg;
        break;
      case "error":
        this.lastError = msg.message;
        break;
    }
  }

  overlayVisible(): boolean {
    return this.feedback !== null && this.feedback.active;
  }

  isStale(nowMs: number): boolean {
    return (
      this.status === "connected" &&
      this.lastStateAtMs !== null &&
      nowMs - this.lastStateAtMs > STALE_AFTER_MS
    );
  }
}
