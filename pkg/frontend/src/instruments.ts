/**
 * Primary flight instruments drawn from the latest state message only:
 * attitude indicator (horizon tilts against the bank, pitch ladder
 * shifts with pitch), a heading tape with the target bug, and altitude
 * and airspeed readouts. Disconnected or stale connections gray out
 * and show a banner instead of guessing.
 */

import type { DrawOp } from "./draw.js";
import { line, rect, text } from "./draw.js";
import type { CockpitViewModel } from "./viewmodel.js";

export interface FrameSize {
  width: number;
  height: number;
}

export const SKY_COLOR = "#3b6ea5";
export const GROUND_COLOR = "#7a5230";
export const TAPE_PX_PER_DEG = 4;
export const PITCH_PX_PER_DEG = 4;

/** Wrapped tape offset in px: 0 when the heading equals the target. */
export function headingBugOffset(heading: number, target: number, pxPerDeg = TAPE_PX_PER_DEG): number {
  let diff = (target - heading) % 360;
  if (diff > 180) diff -= 360;
  if (diff <= -180) diff += 360;
  return diff * pxPerDeg;
}

function attitudeIndicator(ops: DrawOp[], cx: number, cy: number, r: number,
                           pitchDeg: number, rollDeg: number): void {
  ops.push({ kind: "circle", x: cx, y: cy, r, color: "#111111", fill: true });
  // The horizon tilts opposite the bank and shifts down as the nose rises.
  const roll = (-rollDeg * Math.PI) / 180;
  const offset = pitchDeg * PITCH_PX_PER_DEG;
  const dx = Math.cos(roll) * r;
  const dy = Math.sin(roll) * r;
  const hx = cx - Math.sin(roll) * offset;
  const hy = cy + Math.cos(roll) * offset;
  ops.push(line(hx - dx, hy - dy, hx + dx, hy + dy, "#ffffff", 2));
  // fixed aircraft reference
  ops.push(line(cx - r * 0.45, cy, cx - r * 0.15, cy, "#ffd600", 3));
  ops.push(line(cx + r * 0.15, cy, cx + r * 0.45, cy, "#ffd600", 3));
  ops.push({ kind: "circle", x: cx, y: cy, r: 2, color: "#ffd600", fill: true });
}

function headingTape(ops: DrawOp[], frame: FrameSize, heading: number, target: number): void {
  const cx = frame.width / 2;
  const top = 8;
  ops.push(rect(cx - 160, top, 320, 30, "#111111", true));
  const first = Math.ceil((heading - 40) / 10) * 10;
  for (let mark = first; mark <= heading + 40; mark += 10) {
    const x = cx + headingBugOffset(heading, mark);
    if (x < cx - 155 || x > cx + 155) continue;
    ops.push(line(x, top + 20, x, top + 30, "#cccccc", 1));
    const label = ((mark % 360) + 360) % 360;
    ops.push(text(x, top + 16, String(label), "#cccccc", 10, "center"));
  }
  const bugX = cx + Math.max(-155, Math.min(155, headingBugOffset(heading, target)));
  ops.push(line(bugX, top, bugX, top + 8, "#ff4081", 3));
  ops.push(line(cx, top + 24, cx, top + 34, "#ffffff", 2));
}

export function renderInstruments(vm: CockpitViewModel, frame: FrameSize, nowMs: number): DrawOp[] {
  const ops: DrawOp[] = [{ kind: "clear", color: "#20262e" }];

  if (vm.status !== "connected" || vm.state === null) {
    ops.push(rect(0, 0, frame.width, frame.height, "rgba(80,80,80,0.6)", true));
    const message = vm.status === "closed" ? "disconnected - reconnecting" : "connecting";
    ops.push(text(frame.width / 2, frame.height / 2, message, "#ffffff", 18, "center"));
    return ops;
  }

  const s = vm.state;
  attitudeIndicator(ops, frame.width / 2, frame.height / 2 + 20,
                    Math.min(frame.width, frame.height) * 0.28, s.pitch_att, s.roll_att);
  headingTape(ops, frame, s.heading, s.target_heading);

  ops.push(text(20, frame.height / 2, `${s.airspeed.toFixed(1)} m/s`, "#ffffff", 16, "left"));
  ops.push(text(frame.width - 20, frame.height / 2, `${s.altitude.toFixed(0)} m`, "#ffffff", 16, "right"));
  ops.push(text(20, frame.height - 16, `t = ${s.t.toFixed(2)} s`, "#9e9e9e", 12, "left"));
  ops.push(text(frame.width - 20, frame.height - 16,
                `hdg ${s.heading.toFixed(1)} / tgt ${s.target_heading.toFixed(1)}`,
                "#9e9e9e", 12, "right"));

  if (vm.isStale(nowMs)) {
    ops.push(text(frame.width / 2, 60, "STALE DATA", "#ff5252", 16, "center"));
  }
  if (vm.lastError !== null) {
    ops.push(text(frame.width / 2, frame.height - 16, vm.lastError, "#ff8a65", 12, "center"));
  }
  if (vm.end !== null) {
    ops.push(text(frame.width / 2, 84, "SESSION COMPLETE", "#ffd600", 16, "center"));
  }
  return ops;
}
