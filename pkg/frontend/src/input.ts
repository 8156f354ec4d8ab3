/**
 * Keyboard yoke: arrow keys or WASD ramp the yoke while held and the
 * axis recenters on release. A control message is emitted every client
 * tick (20 Hz) whether or not anything changed, carrying the client
 * timestamp.
 *
 * Up arrow / W pulls (nose up, positive yoke pitch); right arrow / D
 * rolls right (positive yoke roll). Opposing keys cancel.
 */

import type { ControlMsg } from "./protocol.js";

export const RAMP_PER_SECOND = 2.0; // 0.5 s from center to full deflection
export const RECENTER_PER_SECOND = 3.0;
export const CLIENT_TICK_HZ = 20;

const PITCH_UP = new Set(["ArrowUp", "KeyW"]);
const PITCH_DOWN = new Set(["ArrowDown", "KeyS"]);
const ROLL_RIGHT = new Set(["ArrowRight", "KeyD"]);
const ROLL_LEFT = new Set(["ArrowLeft", "KeyA"]);

function clamp(v: number): number {
  return v < -1 ? -1 : v > 1 ? 1 : v;
}

export class KeyboardYoke {
  yokePitch = 0;
  yokeRoll = 0;
  private held = new Set<string>();

  keyDown(code: string): void {
    this.held.add(code);
  }

  keyUp(code: string): void {
    this.held.delete(code);
  }

  releaseAll(): void {
    this.held.clear();
  }

  private direction(positive: Set<string>, negative: Set<string>): number {
    let dir = 0;
    for (const code of this.held) {
      if (positive.has(code)) {
        dir += 1;
        break;
      }
    }
    for (const code of this.held) {
      if (negative.has(code)) {
        dir -= 1;
        break;
      }
    }
    return dir;
  }

  private ramp(value: number, dir: number, dtSeconds: number): number {
    if (dir !== 0) {
      const next = clamp(value + dir * RAMP_PER_SECOND * dtSeconds);
      // snap to full deflection so accumulated float steps saturate exactly
      if (next > 1 - 1e-9) return 1;
      if (next < -1 + 1e-9) return -1;
      return next;
    }
    const step = RECENTER_PER_SECOND * dtSeconds;
    if (Math.abs(value) <= step) return 0;
    return value - Math.sign(value) * step;
  }

  /** Advance the ramp by dt seconds using the currently held keys. */
  update(dtSeconds: number): void {
    this.yokePitch = this.ramp(this.yokePitch, this.direction(PITCH_UP, PITCH_DOWN), dtSeconds);
    this.yokeRoll = this.ramp(this.yokeRoll, this.direction(ROLL_RIGHT, ROLL_LEFT), dtSeconds);
  }

  controlMessage(clientTimeSeconds: number): ControlMsg {
    return { type: "control", t: clientTimeSeconds, yp: this.yokePitch, yr: this.yokeRoll };
  }
}
