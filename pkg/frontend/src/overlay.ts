/**
 * Feedback overlay: a black square containing two lines, one for the
 * agent (green) and one for the student (blue). Each line is centered
 * at that pilot's (roll, pitch) yoke position mapped linearly from
 * [-1, 1]^2 onto the square, and tilted by its slope angle (the roll
 * command mapped onto +-45 deg); positive slope tilts the right end
 * down, like dipping the right wing. The student's goal is to overlap
 * the two lines. Hidden whenever no flag is active.
 */

import type { DrawOp } from "./draw.js";
import { line, rect, text } from "./draw.js";
import type { FeedbackMsg, LineInfo } from "./protocol.js";

export const AGENT_COLOR = "#00c853"; // green, the tutor's line
export const STUDENT_COLOR = "#2979ff"; // blue, the student's line
export const SQUARE_COLOR = "#000000";
export const LINE_LENGTH_FRACTION = 0.35; // of the square size, total length

export interface SquareRect {
  x: number; // left edge, px
  y: number; // top edge, px
  size: number; // px, square
}

/**
 * Exact linear map from overlay coordinates in [-1, 1]^2 to pixels:
 * (-1, -1) is the bottom-left corner of the square, (1, 1) the top-right
 * (screen y grows downward, stick back / pitch up is drawn upward).
 */
export function squarePoint(cx: number, cy: number, sq: SquareRect): { x: number; y: number } {
  return {
    x: sq.x + ((cx + 1) / 2) * sq.size,
    y: sq.y + ((1 - cy) / 2) * sq.size,
  };
}

/** Endpoints of one overlay line; the pixel-space tilt equals slope_angle. */
export function lineEndpoints(
  info: LineInfo, sq: SquareRect,
): { x1: number; y1: number; x2: number; y2: number } {
  const center = squarePoint(info.center_x, info.center_y, sq);
  const half = (LINE_LENGTH_FRACTION * sq.size) / 2;
  const angle = (info.slope_angle * Math.PI) / 180;
  const dx = Math.cos(angle) * half;
  const dy = Math.sin(angle) * half; // +slope tilts the right end down on screen
  return { x1: center.x - dx, y1: center.y - dy, x2: center.x + dx, y2: center.y + dy };
}

export function renderFeedbackOverlay(event: FeedbackMsg | null, sq: SquareRect): DrawOp[] {
  if (event === null || !event.active) {
    return [];
  }
  const ops: DrawOp[] = [rect(sq.x, sq.y, sq.size, sq.size, SQUARE_COLOR, true)];
  const agent = lineEndpoints(event.agent_line, sq);
  const student = lineEndpoints(event.student_line, sq);
  ops.push(line(agent.x1, agent.y1, agent.x2, agent.y2, AGENT_COLOR, 3));
  ops.push(line(student.x1, student.y1, student.x2, student.y2, STUDENT_COLOR, 3));

  const badgeColor = event.verification === "OnTrack" ? AGENT_COLOR : "#ff5252";
  ops.push(text(sq.x + sq.size / 2, sq.y + sq.size + 18, event.verification, badgeColor, 14, "center"));
  if (event.hint) {
    ops.push(text(sq.x + sq.size / 2, sq.y + sq.size + 36, event.hint, "#eeeeee", 12, "center"));
  }
  return ops;
}
