/**
 * Frame descriptions: renderers emit a flat list of primitive draw
 * operations instead of touching a canvas, so frames are plain data and
 * rendering is deterministic and snapshot-testable. canvas.ts executes
 * the same ops in the browser.
 */

export type DrawOp =
  | { kind: "clear"; color: string }
  | { kind: "line"; x1: number; y1: number; x2: number; y2: number; color: string; width: number }
  | { kind: "rect"; x: number; y: number; w: number; h: number; color: string; fill: boolean }
  | { kind: "circle"; x: number; y: number; r: number; color: string; fill: boolean }
  | {
      kind: "text";
      x: number;
      y: number;
      text: string;
      color: string;
      size: number;
      align: "left" | "center" | "right";
    };

export function line(
  x1: number, y1: number, x2: number, y2: number, color: string, width = 1,
): DrawOp {
  return { kind: "line", x1, y1, x2, y2, color, width };
}

export function rect(
  x: number, y: number, w: number, h: number, color: string, fill = true,
): DrawOp {
  return { kind: "rect", x, y, w, h, color, fill };
}

export function text(
  x: number, y: number, content: string, color: string, size = 14,
  align: "left" | "center" | "right" = "left",
): DrawOp {
  return { kind: "text", x, y, text: content, color, size, align };
}
